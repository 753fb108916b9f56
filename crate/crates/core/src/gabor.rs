//! Gabor kernels, filter banks and magnitude feature extraction.
//!
//! A kernel is a complex plane wave under an elliptical Gaussian envelope,
//! sampled on a fixed square support. Filtering is a zero-padded 2D
//! correlation (no kernel flip); only the magnitude of the complex response
//! is kept, so the flip would only change the phase.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct GaborBankConfig {
    /// Highest centre frequency, cycles per pixel.
    pub f_max: f64,
    /// Ratio of frequency to envelope sharpness along the wave.
    pub gamma: f64,
    /// Ratio of frequency to envelope sharpness across the wave.
    pub eta: f64,
    pub num_scales: usize,
    pub num_orientations: usize,
    /// Kernel side is `2 * kernel_radius + 1`.
    pub kernel_radius: usize,
    /// Stride of the sampled response grid.
    pub downsample_step: usize,
}

impl Default for GaborBankConfig {
    fn default() -> Self {
        GaborBankConfig {
            f_max: 0.25,
            gamma: std::f64::consts::SQRT_2,
            eta: std::f64::consts::SQRT_2,
            num_scales: 5,
            num_orientations: 8,
            kernel_radius: 16,
            downsample_step: 4,
        }
    }
}

impl GaborBankConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::param(format!("{name} must be a positive finite number, got {v}")))
            }
        };
        positive("f_max", self.f_max)?;
        positive("gamma", self.gamma)?;
        positive("eta", self.eta)?;
        for (name, v) in [
            ("num_scales", self.num_scales),
            ("num_orientations", self.num_orientations),
            ("kernel_radius", self.kernel_radius),
            ("downsample_step", self.downsample_step),
        ] {
            if v == 0 {
                return Err(Error::param(format!("{name} must be at least 1")));
            }
        }
        Ok(())
    }

    /// Centre frequency of scale `u`: `f_max / sqrt(2^u)`.
    pub fn frequency(&self, u: usize) -> f64 {
        self.f_max / 2f64.powi(u as i32).sqrt()
    }

    /// Orientation of index `v`: `v * pi / V`.
    pub fn orientation(&self, v: usize) -> f64 {
        v as f64 / self.num_orientations as f64 * PI
    }
}

/// One sampled Gabor wavelet.
#[derive(Clone, Debug)]
pub struct GaborKernel {
    pub scale_index: usize,
    pub orientation_index: usize,
    pub frequency: f64,
    pub theta: f64,
    radius: usize,
    taps: Vec<Complex64>,
}

impl GaborKernel {
    /// Samples the wavelet with centre frequency `frequency` and orientation
    /// `theta` on the square support `[-radius, radius]^2`.
    pub fn with_params(frequency: f64, theta: f64, gamma: f64, eta: f64, radius: usize) -> Self {
        let alpha = frequency / gamma;
        let beta = frequency / eta;
        let norm = frequency * frequency / (PI * gamma * eta);
        let (sin_t, cos_t) = theta.sin_cos();
        let r = radius as i64;
        let side = 2 * radius + 1;
        let mut taps = Vec::with_capacity(side * side);
        for y in -r..=r {
            for x in -r..=r {
                let (x, y) = (x as f64, y as f64);
                let xr = x * cos_t + y * sin_t;
                let yr = -x * sin_t + y * cos_t;
                let envelope = norm * (-(alpha * alpha * xr * xr + beta * beta * yr * yr)).exp();
                let phase = 2.0 * PI * frequency * xr;
                taps.push(Complex64::from_polar(envelope, phase));
            }
        }
        GaborKernel {
            scale_index: 0,
            orientation_index: 0,
            frequency,
            theta,
            radius,
            taps,
        }
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn side(&self) -> usize {
        2 * self.radius + 1
    }

    /// Tap at offset `(x, y)`; panics when the offset is outside the support.
    pub fn tap(&self, x: i64, y: i64) -> Complex64 {
        let r = self.radius as i64;
        assert!(x.abs() <= r && y.abs() <= r, "offset ({x}, {y}) outside kernel radius {r}");
        self.taps[((y + r) as usize) * self.side() + (x + r) as usize]
    }

    /// Row-major taps, first row at `y = -radius`.
    pub fn taps(&self) -> &[Complex64] {
        &self.taps
    }
}

/// Builds the kernel for scale `u` and orientation `v` of the bank.
pub fn make_kernel(config: &GaborBankConfig, u: usize, v: usize) -> Result<GaborKernel> {
    config.validate()?;
    if u >= config.num_scales {
        return Err(Error::param(format!(
            "scale index {u} out of range 0..{}",
            config.num_scales
        )));
    }
    if v >= config.num_orientations {
        return Err(Error::param(format!(
            "orientation index {v} out of range 0..{}",
            config.num_orientations
        )));
    }
    let mut kernel = GaborKernel::with_params(
        config.frequency(u),
        config.orientation(v),
        config.gamma,
        config.eta,
        config.kernel_radius,
    );
    kernel.scale_index = u;
    kernel.orientation_index = v;
    Ok(kernel)
}

/// All `U * V` kernels, scale-major. This order is the feature index order.
pub fn make_bank(config: &GaborBankConfig) -> Result<Vec<GaborKernel>> {
    config.validate()?;
    let mut bank = Vec::with_capacity(config.num_scales * config.num_orientations);
    for u in 0..config.num_scales {
        for v in 0..config.num_orientations {
            bank.push(make_kernel(config, u, v)?);
        }
    }
    Ok(bank)
}

/// Grayscale image with values in `[0, 1]`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl Image {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::param(format!("image dimensions must be positive, got {width}x{height}")));
        }
        if pixels.len() != width * height {
            return Err(Error::param(format!(
                "pixel count {} does not match {width}x{height}",
                pixels.len()
            )));
        }
        if let Some(p) = pixels.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::param(format!("pixel value {p} outside [0, 1]")));
        }
        Ok(Image {
            width,
            height,
            pixels,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Result<Self> {
        Image::new(width, height, vec![0.0; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.pixels[y * self.width + x]
    }
}

/// Magnitude of the zero-padded correlation of `image` with `kernel`
/// centred at pixel `(x, y)`.
pub fn response_at(image: &Image, kernel: &GaborKernel, x: usize, y: usize) -> f64 {
    let r = kernel.radius as i64;
    let side = kernel.side();
    let (w, h) = (image.width as i64, image.height as i64);
    let (px, py) = (x as i64, y as i64);
    let dx0 = (-r).max(-px);
    let dx1 = r.min(w - 1 - px);
    let dy0 = (-r).max(-py);
    let dy1 = r.min(h - 1 - py);
    let mut re = 0.0;
    let mut im = 0.0;
    for dy in dy0..=dy1 {
        let row = ((py + dy) * w) as usize;
        let krow = ((dy + r) as usize) * side;
        for dx in dx0..=dx1 {
            let p = image.pixels[row + (px + dx) as usize];
            let k = kernel.taps[krow + (dx + r) as usize];
            re += p * k.re;
            im += p * k.im;
        }
    }
    re.hypot(im)
}

/// Response magnitude at every pixel, row-major, same size as the image.
pub fn convolve_magnitude(image: &Image, kernel: &GaborKernel) -> Vec<f64> {
    let mut out = Vec::with_capacity(image.width * image.height);
    for y in 0..image.height {
        for x in 0..image.width {
            out.push(response_at(image, kernel, x, y));
        }
    }
    out
}

/// Geometry of a feature vector: which (scale, orientation, grid cell) each
/// component belongs to.
///
/// Index codec: `((u * V + v) * rows + row) * cols + col`, where grid cell
/// `(row, col)` sits at pixel `(col * step, row * step)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FeatureLayout {
    pub num_scales: usize,
    pub num_orientations: usize,
    pub step: usize,
    pub width: usize,
    pub height: usize,
}

/// Decoded position of one feature component.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FeatureLocation {
    pub u: usize,
    pub v: usize,
    pub row: usize,
    pub col: usize,
    pub x: usize,
    pub y: usize,
}

impl FeatureLayout {
    pub fn new(num_scales: usize, num_orientations: usize, step: usize, width: usize, height: usize) -> Result<Self> {
        if num_scales == 0 || num_orientations == 0 || step == 0 || width == 0 || height == 0 {
            return Err(Error::param("feature layout dimensions must all be positive"));
        }
        Ok(FeatureLayout {
            num_scales,
            num_orientations,
            step,
            width,
            height,
        })
    }

    pub fn for_image(config: &GaborBankConfig, width: usize, height: usize) -> Result<Self> {
        FeatureLayout::new(
            config.num_scales,
            config.num_orientations,
            config.downsample_step,
            width,
            height,
        )
    }

    pub fn rows(&self) -> usize {
        self.height.div_ceil(self.step)
    }

    pub fn cols(&self) -> usize {
        self.width.div_ceil(self.step)
    }

    pub fn len(&self) -> usize {
        self.num_scales * self.num_orientations * self.rows() * self.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn encode(&self, u: usize, v: usize, row: usize, col: usize) -> Result<usize> {
        if u >= self.num_scales || v >= self.num_orientations || row >= self.rows() || col >= self.cols() {
            return Err(Error::param(format!(
                "feature coordinates (u={u}, v={v}, row={row}, col={col}) outside layout {self}"
            )));
        }
        Ok(((u * self.num_orientations + v) * self.rows() + row) * self.cols() + col)
    }

    pub fn decode(&self, index: usize) -> Result<FeatureLocation> {
        if index >= self.len() {
            return Err(Error::param(format!(
                "feature index {index} out of range 0..{}",
                self.len()
            )));
        }
        let cols = self.cols();
        let rows = self.rows();
        let col = index % cols;
        let rest = index / cols;
        let row = rest % rows;
        let kernel = rest / rows;
        Ok(FeatureLocation {
            u: kernel / self.num_orientations,
            v: kernel % self.num_orientations,
            row,
            col,
            x: col * self.step,
            y: row * self.step,
        })
    }
}

impl fmt::Display for FeatureLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "U={} V={} step={} width={} height={}",
            self.num_scales, self.num_orientations, self.step, self.width, self.height
        )
    }
}

impl FromStr for FeatureLayout {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut fields = [None; 5];
        for token in s.split_whitespace() {
            let (key, value) = token
                .split_once('=')
                .ok_or_else(|| Error::param(format!("malformed layout token `{token}`")))?;
            let slot = match key {
                "U" => 0,
                "V" => 1,
                "step" => 2,
                "width" => 3,
                "height" => 4,
                _ => return Err(Error::param(format!("unknown layout key `{key}`"))),
            };
            let value: usize = value
                .parse()
                .map_err(|_| Error::param(format!("bad layout value `{token}`")))?;
            fields[slot] = Some(value);
        }
        let get = |i: usize, name: &str| fields[i].ok_or_else(|| Error::param(format!("layout missing `{name}`")));
        FeatureLayout::new(get(0, "U")?, get(1, "V")?, get(2, "step")?, get(3, "width")?, get(4, "height")?)
    }
}

/// Concatenated response magnitudes of one image in layout order.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub layout: FeatureLayout,
}

fn bank_shape(bank: &[GaborKernel]) -> Result<(usize, usize)> {
    let last = bank.last().ok_or_else(|| Error::param("empty filter bank"))?;
    let scales = last.scale_index + 1;
    let orientations = last.orientation_index + 1;
    if scales * orientations != bank.len() {
        return Err(Error::param("filter bank is not a complete scale-major grid"));
    }
    for (i, k) in bank.iter().enumerate() {
        if k.scale_index != i / orientations || k.orientation_index != i % orientations {
            return Err(Error::param(format!("filter bank kernel {i} is out of canonical order")));
        }
    }
    Ok((scales, orientations))
}

/// Dense feature vector: every kernel sampled on the stride-`step` grid.
pub fn extract_features(image: &Image, bank: &[GaborKernel], step: usize) -> Result<FeatureVector> {
    let (scales, orientations) = bank_shape(bank)?;
    let layout = FeatureLayout::new(scales, orientations, step, image.width, image.height)?;
    let mut values = Vec::with_capacity(layout.len());
    for kernel in bank {
        for row in 0..layout.rows() {
            for col in 0..layout.cols() {
                values.push(response_at(image, kernel, col * step, row * step));
            }
        }
    }
    Ok(FeatureVector { values, layout })
}

/// Computes only the requested components, one local correlation each.
pub fn extract_selected(image: &Image, bank: &[GaborKernel], step: usize, selected: &[usize]) -> Result<Vec<f64>> {
    let (scales, orientations) = bank_shape(bank)?;
    let layout = FeatureLayout::new(scales, orientations, step, image.width, image.height)?;
    selected
        .iter()
        .map(|&index| {
            let loc = layout.decode(index)?;
            let kernel = &bank[loc.u * orientations + loc.v];
            Ok(response_at(image, kernel, loc.x, loc.y))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> GaborBankConfig {
        GaborBankConfig {
            kernel_radius: 3,
            ..GaborBankConfig::default()
        }
    }

    #[test]
    fn origin_tap_is_normalizer() {
        let cfg = small_config();
        for u in 0..cfg.num_scales {
            for v in 0..cfg.num_orientations {
                let k = make_kernel(&cfg, u, v).unwrap();
                let f = cfg.frequency(u);
                let expected = f * f / (PI * cfg.gamma * cfg.eta);
                assert_eq!(k.tap(0, 0), Complex64::new(expected, 0.0));
            }
        }
    }

    #[test]
    fn frequency_and_orientation_grid() {
        let cfg = GaborBankConfig::default();
        let k = make_kernel(&cfg, 2, 0).unwrap();
        assert!((k.frequency - 0.125).abs() < 1e-15);
        let k = make_kernel(&cfg, 0, 4).unwrap();
        assert!((k.theta - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn quarter_turn_rotates_taps() {
        let cfg = small_config();
        let k0 = make_kernel(&cfg, 1, 0).unwrap();
        let k4 = make_kernel(&cfg, 1, 4).unwrap();
        let r = cfg.kernel_radius as i64;
        for y in -r..=r {
            for x in -r..=r {
                let d = k4.tap(x, y) - k0.tap(y, -x);
                assert!(d.norm() < 1e-14, "({x},{y}) differs by {}", d.norm());
            }
        }
    }

    #[test]
    fn half_turn_keeps_mirrored_magnitudes() {
        let cfg = small_config();
        for v in 0..cfg.num_orientations {
            let k = make_kernel(&cfg, 0, v).unwrap();
            let flipped = GaborKernel::with_params(k.frequency, k.theta + PI, cfg.gamma, cfg.eta, cfg.kernel_radius);
            let r = cfg.kernel_radius as i64;
            for y in -r..=r {
                for x in -r..=r {
                    assert!((flipped.tap(x, y).norm() - k.tap(-x, -y).norm()).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn kernel_index_errors() {
        let cfg = GaborBankConfig::default();
        assert!(matches!(make_kernel(&cfg, 5, 0), Err(Error::Parameter(_))));
        assert!(matches!(make_kernel(&cfg, 0, 8), Err(Error::Parameter(_))));
    }

    #[test]
    fn config_validation() {
        let bad = [
            GaborBankConfig { f_max: 0.0, ..Default::default() },
            GaborBankConfig { gamma: -1.0, ..Default::default() },
            GaborBankConfig { eta: f64::NAN, ..Default::default() },
            GaborBankConfig { num_scales: 0, ..Default::default() },
            GaborBankConfig { num_orientations: 0, ..Default::default() },
            GaborBankConfig { kernel_radius: 0, ..Default::default() },
            GaborBankConfig { downsample_step: 0, ..Default::default() },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
    }

    #[test]
    fn bank_order_and_size() {
        assert_eq!(make_bank(&GaborBankConfig::default()).unwrap().len(), 40);

        let one = GaborBankConfig { num_scales: 1, num_orientations: 1, ..Default::default() };
        let bank = make_bank(&one).unwrap();
        assert_eq!(bank.len(), 1);
        assert_eq!(bank[0].frequency, one.f_max);
        assert_eq!(bank[0].theta, 0.0);

        let two = GaborBankConfig { num_scales: 2, num_orientations: 2, ..Default::default() };
        let order: Vec<_> = make_bank(&two)
            .unwrap()
            .iter()
            .map(|k| (k.scale_index, k.orientation_index))
            .collect();
        assert_eq!(order, vec![(0, 0), (0, 1), (1, 0), (1, 1)]);
    }

    #[test]
    fn zero_image_gives_zero_response() {
        let img = Image::zeros(9, 7).unwrap();
        let k = make_kernel(&small_config(), 0, 3).unwrap();
        let out = convolve_magnitude(&img, &k);
        assert_eq!(out.len(), 63);
        assert!(out.iter().all(|&m| m == 0.0));
    }

    #[test]
    fn feature_lengths() {
        let cfg = GaborBankConfig { kernel_radius: 2, ..Default::default() };
        let bank = make_bank(&cfg).unwrap();
        let img = Image::zeros(64, 64).unwrap();
        assert_eq!(extract_features(&img, &bank, 8).unwrap().values.len(), 2560);
        let layout = FeatureLayout::for_image(&GaborBankConfig { downsample_step: 1, ..cfg }, 64, 64).unwrap();
        assert_eq!(layout.len(), 163_840);
        // ceil on both axes
        let odd = FeatureLayout::new(5, 8, 4, 65, 63).unwrap();
        assert_eq!((odd.rows(), odd.cols()), (16, 17));
    }

    #[test]
    fn layout_codec_round_trip() {
        let layout = FeatureLayout::new(3, 4, 3, 10, 8).unwrap();
        for index in 0..layout.len() {
            let loc = layout.decode(index).unwrap();
            assert_eq!(layout.encode(loc.u, loc.v, loc.row, loc.col).unwrap(), index);
            assert_eq!((loc.x, loc.y), (loc.col * 3, loc.row * 3));
        }
        assert!(layout.decode(layout.len()).is_err());
        assert_eq!(layout.to_string().parse::<FeatureLayout>().unwrap(), layout);
    }

    #[test]
    fn selected_matches_dense() {
        let cfg = GaborBankConfig { kernel_radius: 4, num_scales: 2, num_orientations: 3, ..Default::default() };
        let bank = make_bank(&cfg).unwrap();
        let pixels = (0..12 * 10).map(|i| ((i * 37) % 101) as f64 / 100.0).collect();
        let img = Image::new(12, 10, pixels).unwrap();
        let dense = extract_features(&img, &bank, 2).unwrap();
        let all: Vec<usize> = (0..dense.values.len()).collect();
        assert_eq!(extract_selected(&img, &bank, 2, &all).unwrap(), dense.values);
        assert!(extract_selected(&img, &bank, 2, &[]).unwrap().is_empty());
        assert!(matches!(
            extract_selected(&img, &bank, 2, &[dense.values.len()]),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn image_rejects_out_of_range_pixels() {
        assert!(Image::new(1, 1, vec![1.5]).is_err());
        assert!(Image::new(0, 1, vec![]).is_err());
        assert!(Image::new(2, 1, vec![0.0]).is_err());
    }
}
