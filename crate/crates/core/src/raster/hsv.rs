//! RGB ↔ HSV conversion (hexcone model).
//!
//! Convention: hue in degrees [0, 360), saturation and value in [0, 1],
//! hue pinned to 0 whenever saturation is 0.

/// One HSV sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HsvPixel {
    /// Hue in degrees, [0, 360). 0 when the pixel is achromatic.
    pub hue_deg: f64,
    /// Saturation fraction, [0, 1].
    pub saturation: f64,
    /// Value fraction, [0, 1]; equals max(r, g, b) / 255.
    pub value: f64,
}

/// Standard hexcone conversion. Total over all byte triples.
pub fn rgb_to_hsv(r: u8, g: u8, b: u8) -> HsvPixel {
    let rf = r as f64 / 255.0;
    let gf = g as f64 / 255.0;
    let bf = b as f64 / 255.0;
    let cmax = rf.max(gf).max(bf);
    let cmin = rf.min(gf).min(bf);
    let delta = cmax - cmin;

    let value = cmax;
    let saturation = if cmax == 0.0 { 0.0 } else { delta / cmax };
    let hue_deg = if delta == 0.0 {
        0.0
    } else if cmax == rf {
        60.0 * ((gf - bf) / delta).rem_euclid(6.0)
    } else if cmax == gf {
        60.0 * ((bf - rf) / delta + 2.0)
    } else {
        60.0 * ((rf - gf) / delta + 4.0)
    };
    // rem_euclid can land exactly on 6.0 for hues infinitesimally below 0
    let hue_deg = if hue_deg >= 360.0 { 0.0 } else { hue_deg };

    HsvPixel {
        hue_deg,
        saturation,
        value,
    }
}

/// Inverse hexcone conversion; the composed round trip rgb→hsv→rgb moves
/// no channel by more than one level.
pub fn hsv_to_rgb(p: HsvPixel) -> (u8, u8, u8) {
    let c = p.value * p.saturation;
    let sector = p.hue_deg / 60.0;
    let x = c * (1.0 - (sector.rem_euclid(2.0) - 1.0).abs());
    let m = p.value - c;
    let (rf, gf, bf) = match sector {
        s if s < 1.0 => (c, x, 0.0),
        s if s < 2.0 => (x, c, 0.0),
        s if s < 3.0 => (0.0, c, x),
        s if s < 4.0 => (0.0, x, c),
        s if s < 5.0 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    (
        quantize(rf + m),
        quantize(gf + m),
        quantize(bf + m),
    )
}

fn quantize(f: f64) -> u8 {
    (f * 255.0).round().clamp(0.0, 255.0) as u8
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gray_has_zero_saturation() {
        let p = rgb_to_hsv(128, 128, 128);
        assert_eq!(p.hue_deg, 0.0);
        assert_eq!(p.saturation, 0.0);
        assert!((p.value - 128.0 / 255.0).abs() < 1e-12);
    }

    #[test]
    fn primary_red_anchor() {
        let p = rgb_to_hsv(255, 0, 0);
        assert_eq!((p.hue_deg, p.saturation, p.value), (0.0, 1.0, 1.0));
        assert_eq!(hsv_to_rgb(p), (255, 0, 0));
    }

    #[test]
    fn cyan_is_180_degrees() {
        let p = rgb_to_hsv(0, 255, 255);
        assert_eq!((p.hue_deg, p.saturation, p.value), (180.0, 1.0, 1.0));
    }

    #[test]
    fn grayscale_axis_to_rgb() {
        let (r, g, b) = hsv_to_rgb(HsvPixel {
            hue_deg: 0.0,
            saturation: 0.0,
            value: 0.5,
        });
        assert_eq!(r, g);
        assert_eq!(g, b);
        assert!((r as i32 - 128).abs() <= 1);
    }

    #[test]
    fn hue_stays_in_range() {
        for (r, g, b) in [(255, 0, 1), (255, 1, 0), (1, 0, 255), (0, 0, 0)] {
            let p = rgb_to_hsv(r, g, b);
            assert!((0.0..360.0).contains(&p.hue_deg), "h = {}", p.hue_deg);
            assert!((0.0..=1.0).contains(&p.saturation));
            assert!((0.0..=1.0).contains(&p.value));
        }
    }
}
