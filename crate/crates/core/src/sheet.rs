//! Labeled side-by-side comparison sheets.

use crate::imaging::{ColorImage, Rgb};

const BACKGROUND: Rgb = [32, 32, 32];
const INK: Rgb = [240, 240, 240];
const GAP: usize = 4;

/// 5x7 glyph as five column bytes, bit 0 at the top.
fn glyph(c: char) -> [u8; 5] {
    match c.to_ascii_uppercase() {
        ' ' => [0x00, 0x00, 0x00, 0x00, 0x00],
        '0' => [0x3E, 0x51, 0x49, 0x45, 0x3E],
        '1' => [0x00, 0x42, 0x7F, 0x40, 0x00],
        '2' => [0x42, 0x61, 0x51, 0x49, 0x46],
        '3' => [0x21, 0x41, 0x45, 0x4B, 0x31],
        '4' => [0x18, 0x14, 0x12, 0x7F, 0x10],
        '5' => [0x27, 0x45, 0x45, 0x45, 0x39],
        '6' => [0x3C, 0x4A, 0x49, 0x49, 0x30],
        '7' => [0x01, 0x71, 0x09, 0x05, 0x03],
        '8' => [0x36, 0x49, 0x49, 0x49, 0x36],
        '9' => [0x06, 0x49, 0x49, 0x29, 0x1E],
        'A' => [0x7E, 0x11, 0x11, 0x11, 0x7E],
        'B' => [0x7F, 0x49, 0x49, 0x49, 0x36],
        'C' => [0x3E, 0x41, 0x41, 0x41, 0x22],
        'D' => [0x7F, 0x41, 0x41, 0x22, 0x1C],
        'E' => [0x7F, 0x49, 0x49, 0x49, 0x41],
        'F' => [0x7F, 0x09, 0x09, 0x09, 0x01],
        'G' => [0x3E, 0x41, 0x49, 0x49, 0x7A],
        'H' => [0x7F, 0x08, 0x08, 0x08, 0x7F],
        'I' => [0x00, 0x41, 0x7F, 0x41, 0x00],
        'J' => [0x20, 0x40, 0x41, 0x3F, 0x01],
        'K' => [0x7F, 0x08, 0x14, 0x22, 0x41],
        'L' => [0x7F, 0x40, 0x40, 0x40, 0x40],
        'M' => [0x7F, 0x02, 0x0C, 0x02, 0x7F],
        'N' => [0x7F, 0x04, 0x08, 0x10, 0x7F],
        'O' => [0x3E, 0x41, 0x41, 0x41, 0x3E],
        'P' => [0x7F, 0x09, 0x09, 0x09, 0x06],
        'Q' => [0x3E, 0x41, 0x51, 0x21, 0x5E],
        'R' => [0x7F, 0x09, 0x19, 0x29, 0x46],
        'S' => [0x46, 0x49, 0x49, 0x49, 0x31],
        'T' => [0x01, 0x01, 0x7F, 0x01, 0x01],
        'U' => [0x3F, 0x40, 0x40, 0x40, 0x3F],
        'V' => [0x1F, 0x20, 0x40, 0x20, 0x1F],
        'W' => [0x3F, 0x40, 0x38, 0x40, 0x3F],
        'X' => [0x63, 0x14, 0x08, 0x14, 0x63],
        'Y' => [0x07, 0x08, 0x70, 0x08, 0x07],
        'Z' => [0x61, 0x51, 0x49, 0x45, 0x43],
        '(' => [0x00, 0x1C, 0x22, 0x41, 0x00],
        ')' => [0x00, 0x41, 0x22, 0x1C, 0x00],
        ',' => [0x00, 0x50, 0x30, 0x00, 0x00],
        '.' => [0x00, 0x60, 0x60, 0x00, 0x00],
        '-' => [0x08, 0x08, 0x08, 0x08, 0x08],
        '=' => [0x14, 0x14, 0x14, 0x14, 0x14],
        _ => [0x02, 0x01, 0x51, 0x09, 0x06],
    }
}

/// Draws `text` with its top-left corner at `(x0, y0)`, each font pixel
/// `scale` pixels wide, clipped to the image.
pub fn draw_text(image: &mut ColorImage, text: &str, x0: usize, y0: usize, scale: usize, color: Rgb) {
    for (k, c) in text.chars().enumerate() {
        for (col, bits) in glyph(c).iter().enumerate() {
            for row in 0..7 {
                if bits >> row & 1 == 0 {
                    continue;
                }
                for dy in 0..scale {
                    for dx in 0..scale {
                        let x = x0 + (k * 6 + col) * scale + dx;
                        let y = y0 + row * scale + dy;
                        if x < image.width() && y < image.height() {
                            image.set(x, y, color);
                        }
                    }
                }
            }
        }
    }
}

/// `(columns, rows)` of a sheet holding `n` tiles: `ceil(sqrt(n))` columns.
pub fn grid_shape(n: usize) -> (usize, usize) {
    if n == 0 {
        return (0, 0);
    }
    let cols = (n as f64).sqrt().ceil() as usize;
    (cols, n.div_ceil(cols))
}

/// Arranges tiles row-major on a grid, each with its label above it.
pub fn compose_sheet(tiles: &[(String, ColorImage)]) -> ColorImage {
    let (cols, rows) = grid_shape(tiles.len());
    if cols == 0 {
        return ColorImage::filled(1, 1, BACKGROUND);
    }
    let cell_w = tiles.iter().map(|t| t.1.width()).max().unwrap();
    let tile_h = tiles.iter().map(|t| t.1.height()).max().unwrap();
    let scale = (cell_w / 240).max(1);
    let label_h = 7 * scale + 2 * GAP;
    let cell_h = label_h + tile_h;
    let mut sheet = ColorImage::filled(cols * cell_w + (cols + 1) * GAP, rows * cell_h + (rows + 1) * GAP, BACKGROUND);
    for (k, (label, tile)) in tiles.iter().enumerate() {
        let x0 = GAP + (k % cols) * (cell_w + GAP);
        let y0 = GAP + (k / cols) * (cell_h + GAP);
        draw_text(&mut sheet, label, x0 + GAP, y0 + GAP, scale, INK);
        for y in 0..tile.height() {
            for x in 0..tile.width() {
                sheet.set(x0 + x, y0 + label_h + y, tile.get(x, y));
            }
        }
    }
    sheet
}
