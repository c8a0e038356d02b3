//! Minimal deterministic 2D renderer backing the figures.
//!
//! Figures are recorded as an ordered list of drawing operations, then
//! rasterized to PNG and serialized to SVG from the same list. Text uses an
//! embedded 5x7 bitmap font, so output bytes depend only on the operations:
//! no system fonts, no external assets, no timestamps.

use image::{ImageOutputFormat, Rgb, RgbImage};
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Color(pub u8, pub u8, pub u8);

pub const BLACK: Color = Color(20, 20, 20);
pub const GRAY: Color = Color(140, 140, 140);
pub const BLUE: Color = Color(46, 94, 170);
pub const RED: Color = Color(186, 60, 50);
pub const WHITE: Color = Color(255, 255, 255);

impl Color {
    fn hex(self) -> String {
        format!("#{:02x}{:02x}{:02x}", self.0, self.1, self.2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Anchor {
    Start,
    Middle,
    End,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DrawOp {
    /// Filled or outlined axis-aligned rectangle.
    Rect {
        x: f64,
        y: f64,
        w: f64,
        h: f64,
        color: Color,
        fill: bool,
    },
    Line {
        x1: f64,
        y1: f64,
        x2: f64,
        y2: f64,
        color: Color,
        dashed: bool,
    },
    Polyline {
        points: Vec<(f64, f64)>,
        color: Color,
    },
    /// Uppercased bitmap text; `y` is the glyph top edge.
    Text {
        x: f64,
        y: f64,
        text: String,
        color: Color,
        scale: u32,
        anchor: Anchor,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Canvas {
    pub width: u32,
    pub height: u32,
    ops: Vec<DrawOp>,
}

impl Canvas {
    pub fn new(width: u32, height: u32) -> Self {
        Canvas {
            width,
            height,
            ops: Vec::new(),
        }
    }

    pub fn ops(&self) -> &[DrawOp] {
        &self.ops
    }

    pub fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, color: Color, fill: bool) {
        self.ops.push(DrawOp::Rect {
            x,
            y,
            w,
            h,
            color,
            fill,
        });
    }

    pub fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, color: Color, dashed: bool) {
        self.ops.push(DrawOp::Line {
            x1,
            y1,
            x2,
            y2,
            color,
            dashed,
        });
    }

    pub fn polyline(&mut self, points: Vec<(f64, f64)>, color: Color) {
        self.ops.push(DrawOp::Polyline { points, color });
    }

    pub fn text(&mut self, x: f64, y: f64, text: &str, color: Color, scale: u32, anchor: Anchor) {
        self.ops.push(DrawOp::Text {
            x,
            y,
            text: text.to_string(),
            color,
            scale,
            anchor,
        });
    }

    pub fn to_svg(&self) -> String {
        let mut out = String::new();
        let _ = write!(
            out,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" \
             viewBox=\"0 0 {} {}\">\n",
            self.width, self.height, self.width, self.height
        );
        let _ = writeln!(
            out,
            "<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"{}\"/>",
            self.width,
            self.height,
            WHITE.hex()
        );
        for op in &self.ops {
            match op {
                DrawOp::Rect {
                    x,
                    y,
                    w,
                    h,
                    color,
                    fill,
                } => {
                    let style = if *fill {
                        format!("fill=\"{}\"", color.hex())
                    } else {
                        format!("fill=\"none\" stroke=\"{}\"", color.hex())
                    };
                    let _ = writeln!(
                        out,
                        "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{w:.2}\" height=\"{h:.2}\" {style}/>"
                    );
                }
                DrawOp::Line {
                    x1,
                    y1,
                    x2,
                    y2,
                    color,
                    dashed,
                } => {
                    let dash = if *dashed {
                        " stroke-dasharray=\"6 4\""
                    } else {
                        ""
                    };
                    let _ = writeln!(
                        out,
                        "<line x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{x2:.2}\" y2=\"{y2:.2}\" \
                         stroke=\"{}\"{dash}/>",
                        color.hex()
                    );
                }
                DrawOp::Polyline { points, color } => {
                    let coords: Vec<String> = points
                        .iter()
                        .map(|(x, y)| format!("{x:.2},{y:.2}"))
                        .collect();
                    let _ = writeln!(
                        out,
                        "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>",
                        coords.join(" "),
                        color.hex()
                    );
                }
                DrawOp::Text {
                    x,
                    y,
                    text,
                    color,
                    scale,
                    anchor,
                } => {
                    // SVG text mirrors the bitmap rendering: same geometry,
                    // drawn as filled pixel rectangles for byte determinism.
                    for (px, py, s) in glyph_pixels(text, *x, *y, *scale, *anchor) {
                        let _ = writeln!(
                            out,
                            "<rect x=\"{px:.2}\" y=\"{py:.2}\" width=\"{s}\" height=\"{s}\" \
                             fill=\"{}\"/>",
                            color.hex()
                        );
                    }
                }
            }
        }
        out.push_str("</svg>\n");
        out
    }

    pub fn to_png(&self) -> Vec<u8> {
        let mut img = RgbImage::from_pixel(self.width, self.height, rgb(WHITE));
        for op in &self.ops {
            match op {
                DrawOp::Rect {
                    x,
                    y,
                    w,
                    h,
                    color,
                    fill,
                } => {
                    if *fill {
                        fill_rect(&mut img, *x, *y, *w, *h, *color);
                    } else {
                        stroke_rect(&mut img, *x, *y, *w, *h, *color);
                    }
                }
                DrawOp::Line {
                    x1,
                    y1,
                    x2,
                    y2,
                    color,
                    dashed,
                } => draw_line(&mut img, *x1, *y1, *x2, *y2, *color, *dashed),
                DrawOp::Polyline { points, color } => {
                    for pair in points.windows(2) {
                        draw_line(
                            &mut img, pair[0].0, pair[0].1, pair[1].0, pair[1].1, *color, false,
                        );
                    }
                }
                DrawOp::Text {
                    x,
                    y,
                    text,
                    color,
                    scale,
                    anchor,
                } => {
                    for (px, py, s) in glyph_pixels(text, *x, *y, *scale, *anchor) {
                        fill_rect(&mut img, px, py, s as f64, s as f64, *color);
                    }
                }
            }
        }
        let mut bytes = Vec::new();
        let mut cursor = std::io::Cursor::new(&mut bytes);
        img.write_to(&mut cursor, ImageOutputFormat::Png)
            .expect("in-memory png encoding cannot fail");
        bytes
    }
}

/// Advance per character cell: five pixel columns plus one of spacing.
pub fn text_width(text: &str, scale: u32) -> f64 {
    (text.chars().count() as u32 * 6 * scale) as f64
}

fn rgb(c: Color) -> Rgb<u8> {
    Rgb([c.0, c.1, c.2])
}

fn fill_rect(img: &mut RgbImage, x: f64, y: f64, w: f64, h: f64, color: Color) {
    let (x0, x1) = span(x, w, img.width());
    let (y0, y1) = span(y, h, img.height());
    for py in y0..y1 {
        for px in x0..x1 {
            img.put_pixel(px, py, rgb(color));
        }
    }
}

fn stroke_rect(img: &mut RgbImage, x: f64, y: f64, w: f64, h: f64, color: Color) {
    draw_line(img, x, y, x + w, y, color, false);
    draw_line(img, x + w, y, x + w, y + h, color, false);
    draw_line(img, x + w, y + h, x, y + h, color, false);
    draw_line(img, x, y + h, x, y, color, false);
}

/// Clamp a half-open pixel span to the image.
fn span(start: f64, len: f64, limit: u32) -> (u32, u32) {
    let a = start.round().max(0.0) as u32;
    let b = (start + len).round().max(0.0) as u32;
    (a.min(limit), b.min(limit))
}

fn draw_line(img: &mut RgbImage, x1: f64, y1: f64, x2: f64, y2: f64, color: Color, dashed: bool) {
    let (mut x, mut y) = (x1.round() as i64, y1.round() as i64);
    let (tx, ty) = (x2.round() as i64, y2.round() as i64);
    let dx = (tx - x).abs();
    let dy = -(ty - y).abs();
    let sx = if x < tx { 1 } else { -1 };
    let sy = if y < ty { 1 } else { -1 };
    let mut err = dx + dy;
    let mut step = 0u64;
    loop {
        // Dashes alternate six pixels on, four off.
        if !dashed || step % 10 < 6 {
            if x >= 0 && y >= 0 && (x as u32) < img.width() && (y as u32) < img.height() {
                img.put_pixel(x as u32, y as u32, rgb(color));
            }
        }
        if x == tx && y == ty {
            break;
        }
        step += 1;
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
}

/// Pixel squares making up a text run, as (x, y, side) triples.
fn glyph_pixels(text: &str, x: f64, y: f64, scale: u32, anchor: Anchor) -> Vec<(f64, f64, u32)> {
    let width = text_width(text, scale);
    let origin = match anchor {
        Anchor::Start => x,
        Anchor::Middle => x - width / 2.0,
        Anchor::End => x - width,
    };
    let mut out = Vec::new();
    for (i, ch) in text.chars().enumerate() {
        let rows = glyph(ch);
        let cell_x = origin + (i as u32 * 6 * scale) as f64;
        for (row, bits) in rows.iter().enumerate() {
            for col in 0..5u32 {
                if bits >> (4 - col) & 1 == 1 {
                    out.push((
                        cell_x + (col * scale) as f64,
                        y + (row as u32 * scale) as f64,
                        scale,
                    ));
                }
            }
        }
    }
    out
}

/// 5x7 bitmap per character; lowercase folds to uppercase, unknown
/// characters render as a filled box so mistakes are visible.
fn glyph(ch: char) -> [u8; 7] {
    match ch.to_ascii_uppercase() {
        'A' => [0x0E, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11],
        'B' => [0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E],
        'C' => [0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E],
        'D' => [0x1E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x1E],
        'E' => [0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F],
        'F' => [0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10],
        'G' => [0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F],
        'H' => [0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11],
        'I' => [0x0E, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E],
        'J' => [0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0C],
        'K' => [0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11],
        'L' => [0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F],
        'M' => [0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11],
        'N' => [0x11, 0x19, 0x15, 0x13, 0x11, 0x11, 0x11],
        'O' => [0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E],
        'P' => [0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10],
        'Q' => [0x0E, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0D],
        'R' => [0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11],
        'S' => [0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E],
        'T' => [0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04],
        'U' => [0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E],
        'V' => [0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04],
        'W' => [0x11, 0x11, 0x11, 0x15, 0x15, 0x15, 0x0A],
        'X' => [0x11, 0x11, 0x0A, 0x04, 0x0A, 0x11, 0x11],
        'Y' => [0x11, 0x11, 0x0A, 0x04, 0x04, 0x04, 0x04],
        'Z' => [0x1F, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1F],
        '0' => [0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E],
        '1' => [0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E],
        '2' => [0x0E, 0x11, 0x01, 0x06, 0x08, 0x10, 0x1F],
        '3' => [0x0E, 0x11, 0x01, 0x06, 0x01, 0x11, 0x0E],
        '4' => [0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02],
        '5' => [0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E],
        '6' => [0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E],
        '7' => [0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08],
        '8' => [0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E],
        '9' => [0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C],
        '.' => [0x00, 0x00, 0x00, 0x00, 0x00, 0x0C, 0x0C],
        ',' => [0x00, 0x00, 0x00, 0x00, 0x0C, 0x04, 0x08],
        '-' => [0x00, 0x00, 0x00, 0x1F, 0x00, 0x00, 0x00],
        '+' => [0x00, 0x04, 0x04, 0x1F, 0x04, 0x04, 0x00],
        '(' => [0x02, 0x04, 0x08, 0x08, 0x08, 0x04, 0x02],
        ')' => [0x08, 0x04, 0x02, 0x02, 0x02, 0x04, 0x08],
        '%' => [0x18, 0x19, 0x02, 0x04, 0x08, 0x13, 0x03],
        '/' => [0x01, 0x01, 0x02, 0x04, 0x08, 0x10, 0x10],
        ':' => [0x00, 0x0C, 0x0C, 0x00, 0x0C, 0x0C, 0x00],
        '=' => [0x00, 0x00, 0x1F, 0x00, 0x1F, 0x00, 0x00],
        '*' => [0x00, 0x04, 0x15, 0x0E, 0x15, 0x04, 0x00],
        ' ' => [0x00; 7],
        _ => [0x1F; 7],
    }
}
