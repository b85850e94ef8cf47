//! Deterministic line-plot rendering straight to pixels: mean curve, an
//! optional standard-deviation band, and a moving-average overlay. No font
//! or windowing dependencies, so regenerating from the same data yields an
//! identical PNG.

use image::{Rgb, RgbImage};

const WIDTH: u32 = 880;
const HEIGHT: u32 = 560;
const MARGIN_L: u32 = 78;
const MARGIN_R: u32 = 24;
const MARGIN_T: u32 = 36;
const MARGIN_B: u32 = 58;

const BG: Rgb<u8> = Rgb([255, 255, 255]);
const AXIS: Rgb<u8> = Rgb([0, 0, 0]);
const GRID: Rgb<u8> = Rgb([225, 225, 225]);
const LINE: Rgb<u8> = Rgb([31, 90, 166]);
const BAND: Rgb<u8> = Rgb([198, 216, 238]);
const MA_LINE: Rgb<u8> = Rgb([196, 90, 24]);

/// One plotted series: y values over x, with an optional +-band (e.g. the
/// cross-seed standard deviation) and an optional smoothed overlay.
pub struct Series<'a> {
    pub xs: &'a [f64],
    pub ys: &'a [f64],
    pub band: Option<&'a [f64]>,
    pub smoothed: Option<&'a [f64]>,
}

/// Renders the series with labeled axes. Labels render in a built-in 5x7
/// cap font (letters, digits, `.-+`).
pub fn render_line_plot(title: &str, x_label: &str, y_label: &str, series: &Series) -> RgbImage {
    let mut img = RgbImage::from_pixel(WIDTH, HEIGHT, BG);
    let n = series.xs.len().min(series.ys.len());
    let plot_w = (WIDTH - MARGIN_L - MARGIN_R) as f64;
    let plot_h = (HEIGHT - MARGIN_T - MARGIN_B) as f64;

    // Data ranges, padded; degenerate ranges widen around the value.
    let (x_min, x_max) = padded_range(&series.xs[..n], 0.0);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let b = series.band.map_or(0.0, |b| b[i]);
        lo = lo.min(series.ys[i] - b);
        hi = hi.max(series.ys[i] + b);
    }
    if let Some(sm) = series.smoothed {
        for &v in &sm[..n.min(sm.len())] {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    let (y_min, y_max) = padded_range_vals(lo, hi, 0.08);

    let x_px = |x: f64| MARGIN_L as f64 + (x - x_min) / (x_max - x_min) * plot_w;
    let y_px = |y: f64| (HEIGHT - MARGIN_B) as f64 - (y - y_min) / (y_max - y_min) * plot_h;

    // Grid and ticks.
    for k in 0..=4 {
        let xv = x_min + (x_max - x_min) * k as f64 / 4.0;
        let yv = y_min + (y_max - y_min) * k as f64 / 4.0;
        let xp = x_px(xv).round() as i64;
        let yp = y_px(yv).round() as i64;
        vline(&mut img, xp, MARGIN_T as i64, (HEIGHT - MARGIN_B) as i64, GRID);
        hline(&mut img, MARGIN_L as i64, (WIDTH - MARGIN_R) as i64, yp, GRID);
        let xl = format_tick(xv);
        draw_text(
            &mut img,
            &xl,
            xp - (xl.len() as i64 * 6) / 2,
            (HEIGHT - MARGIN_B + 8) as i64,
            AXIS,
        );
        let yl = format_tick(yv);
        draw_text(
            &mut img,
            &yl,
            MARGIN_L as i64 - 6 * yl.len() as i64 - 6,
            yp - 3,
            AXIS,
        );
    }

    // Std band first so lines draw on top.
    if let Some(band) = series.band {
        for i in 0..n {
            let xp = x_px(series.xs[i]).round() as i64;
            let top = y_px(series.ys[i] + band[i]).round() as i64;
            let bot = y_px(series.ys[i] - band[i]).round() as i64;
            let half = if n > 1 {
                ((plot_w / (n - 1) as f64) / 2.0).ceil() as i64
            } else {
                plot_w as i64 / 2
            };
            for dx in -half..=half {
                vline(&mut img, xp + dx, top, bot, BAND);
            }
        }
    }

    for (ys, color) in [
        (Some(&series.ys[..n]), LINE),
        (series.smoothed.map(|s| &s[..n.min(s.len())]), MA_LINE),
    ] {
        if let Some(ys) = ys {
            for i in 1..ys.len() {
                line(
                    &mut img,
                    x_px(series.xs[i - 1]),
                    y_px(ys[i - 1]),
                    x_px(series.xs[i]),
                    y_px(ys[i]),
                    color,
                );
            }
            if ys.len() == 1 {
                fill_dot(&mut img, x_px(series.xs[0]), y_px(ys[0]), color);
            }
        }
    }

    // Axes over everything.
    vline(
        &mut img,
        MARGIN_L as i64,
        MARGIN_T as i64,
        (HEIGHT - MARGIN_B) as i64,
        AXIS,
    );
    hline(
        &mut img,
        MARGIN_L as i64,
        (WIDTH - MARGIN_R) as i64,
        (HEIGHT - MARGIN_B) as i64,
        AXIS,
    );

    draw_text(&mut img, title, MARGIN_L as i64, 12, AXIS);
    let xl_x = MARGIN_L as i64 + (plot_w as i64 - 6 * x_label.len() as i64) / 2;
    draw_text(&mut img, x_label, xl_x, (HEIGHT - 22) as i64, AXIS);
    draw_text(&mut img, y_label, 6, 12, AXIS);
    img
}

fn padded_range(xs: &[f64], pad: f64) -> (f64, f64) {
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    padded_range_vals(lo, hi, pad)
}

fn padded_range_vals(lo: f64, hi: f64, pad: f64) -> (f64, f64) {
    let (lo, hi) = if lo.is_finite() && hi.is_finite() {
        (lo, hi)
    } else {
        (0.0, 1.0)
    };
    if lo == hi {
        return (lo - 1.0, hi + 1.0);
    }
    let span = hi - lo;
    (lo - pad * span, hi + pad * span)
}

fn format_tick(v: f64) -> String {
    let text = if v.abs() >= 1000.0 {
        format!("{:.0}K", v / 1000.0)
    } else if v == v.round() {
        format!("{v:.0}")
    } else if v.abs() >= 1.0 {
        format!("{v:.2}")
    } else {
        format!("{v:.3}")
    };
    text.to_uppercase()
}

fn put(img: &mut RgbImage, x: i64, y: i64, c: Rgb<u8>) {
    if x >= 0 && y >= 0 && (x as u32) < img.width() && (y as u32) < img.height() {
        img.put_pixel(x as u32, y as u32, c);
    }
}

fn hline(img: &mut RgbImage, x0: i64, x1: i64, y: i64, c: Rgb<u8>) {
    for x in x0.min(x1)..=x0.max(x1) {
        put(img, x, y, c);
    }
}

fn vline(img: &mut RgbImage, x: i64, y0: i64, y1: i64, c: Rgb<u8>) {
    for y in y0.min(y1)..=y0.max(y1) {
        put(img, x, y, c);
    }
}

fn fill_dot(img: &mut RgbImage, x: f64, y: f64, c: Rgb<u8>) {
    for dy in -2i64..=2 {
        for dx in -2i64..=2 {
            put(img, x as i64 + dx, y as i64 + dy, c);
        }
    }
}

fn line(img: &mut RgbImage, x0: f64, y0: f64, x1: f64, y1: f64, c: Rgb<u8>) {
    let steps = ((x1 - x0).abs().max((y1 - y0).abs()).ceil() as usize).max(1);
    for s in 0..=steps {
        let t = s as f64 / steps as f64;
        put(
            img,
            (x0 + t * (x1 - x0)).round() as i64,
            (y0 + t * (y1 - y0)).round() as i64,
            c,
        );
    }
}

/// 5x7 cap glyphs, one u8 per row, low 5 bits used (MSB on the left).
fn glyph(ch: char) -> [u8; 7] {
    match ch.to_ascii_uppercase() {
        '0' => [0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E],
        '1' => [0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E],
        '2' => [0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F],
        '3' => [0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E],
        '4' => [0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02],
        '5' => [0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E],
        '6' => [0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E],
        '7' => [0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08],
        '8' => [0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E],
        '9' => [0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C],
        '.' => [0x00, 0x00, 0x00, 0x00, 0x00, 0x0C, 0x0C],
        '-' => [0x00, 0x00, 0x00, 0x1F, 0x00, 0x00, 0x00],
        '+' => [0x00, 0x04, 0x04, 0x1F, 0x04, 0x04, 0x00],
        'A' => [0x0E, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11],
        'B' => [0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E],
        'C' => [0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E],
        'D' => [0x1E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x1E],
        'E' => [0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F],
        'F' => [0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10],
        'G' => [0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F],
        'H' => [0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11],
        'I' => [0x0E, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E],
        'K' => [0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11],
        'L' => [0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F],
        'M' => [0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11],
        'N' => [0x11, 0x19, 0x15, 0x13, 0x11, 0x11, 0x11],
        'O' => [0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E],
        'P' => [0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10],
        'R' => [0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11],
        'S' => [0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E],
        'T' => [0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04],
        'U' => [0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E],
        'V' => [0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04],
        'W' => [0x11, 0x11, 0x11, 0x15, 0x15, 0x1B, 0x11],
        'X' => [0x11, 0x11, 0x0A, 0x04, 0x0A, 0x11, 0x11],
        'Z' => [0x1F, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1F],
        _ => [0x00; 7], // unknown chars render as spaces
    }
}

fn draw_text(img: &mut RgbImage, text: &str, x: i64, y: i64, c: Rgb<u8>) {
    for (i, ch) in text.chars().enumerate() {
        let g = glyph(ch);
        let gx = x + i as i64 * 6;
        for (row, bits) in g.iter().enumerate() {
            for col in 0..5 {
                if bits & (0x10 >> col) != 0 {
                    put(img, gx + col as i64, y + row as i64, c);
                }
            }
        }
    }
}
