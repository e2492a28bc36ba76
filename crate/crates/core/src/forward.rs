//! Simulated acquisition: zero-filled single- and multi-coil encoding,
//! coil maps, the Shepp-Logan phantom and k-space noise.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::numerics::{centered_fft, fft2c, ifft2c, ComplexImage, KSpace};
use crate::sampling::CartesianMask;
use rustfft::FftDirection;

/// Allowed deviation of `sum_c |S_c|^2` from one.
pub const SENSITIVITY_TOL: f64 = 1e-10;

/// Per-coil complex gain maps, stacked `coils x H x W`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoilSensitivities {
    coils: usize,
    height: usize,
    width: usize,
    data: Vec<Complex64>,
}

impl CoilSensitivities {
    /// Wraps raw maps. Normalization is checked by [`CoilSensitivities::validate`].
    pub fn new(coils: usize, height: usize, width: usize, data: Vec<Complex64>) -> Result<Self> {
        // reuse the k-space shape/finiteness checks
        let k = KSpace::new(coils, height, width, data)?;
        Ok(Self::from_stack(k))
    }

    pub fn from_stack(stack: KSpace) -> Self {
        Self {
            coils: stack.coils(),
            height: stack.height(),
            width: stack.width(),
            data: stack.data().to_vec(),
        }
    }

    /// The maps as a stacked complex array (same layout as k-space).
    pub fn to_stack(&self) -> KSpace {
        KSpace::new(self.coils, self.height, self.width, self.data.clone())
            .expect("sensitivities are finite by construction")
    }

    pub fn coils(&self) -> usize {
        self.coils
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn map(&self, c: usize) -> &[Complex64] {
        let n = self.height * self.width;
        &self.data[c * n..(c + 1) * n]
    }

    /// Largest deviation of `sum_c conj(S_c) S_c` from one over all pixels.
    pub fn normalization_error(&self) -> f64 {
        let n = self.height * self.width;
        (0..n)
            .map(|i| {
                let s: f64 = (0..self.coils)
                    .map(|c| self.data[c * n + i].norm_sqr())
                    .sum();
                (s - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }

    pub fn validate(&self) -> Result<()> {
        let err = self.normalization_error();
        if err > SENSITIVITY_TOL {
            return Err(Error::Validation(format!(
                "coil sensitivities not normalized (max deviation {err:e})"
            )));
        }
        Ok(())
    }

    fn check_image(&self, height: usize, width: usize) -> Result<()> {
        if self.height != height || self.width != width {
            return Err(Error::Shape(format!(
                "{}x{} sensitivities vs {}x{} grid",
                self.height, self.width, height, width
            )));
        }
        Ok(())
    }
}

/// Complex circular Gaussian noise on sampled k-space entries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    /// Standard deviation of each of the real and imaginary parts.
    pub sigma: f64,
    pub seed: u64,
}

impl NoiseModel {
    pub fn none() -> Self {
        Self {
            sigma: 0.0,
            seed: 0,
        }
    }

    pub fn new(sigma: f64, seed: u64) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::config(
                "noise_sigma",
                "must be a finite nonnegative number",
            ));
        }
        Ok(Self { sigma, seed })
    }
}

/// Zeroes every column outside the mask support, in every coil.
pub fn apply_mask(k: &mut KSpace, mask: &CartesianMask) -> Result<()> {
    if k.width() != mask.width() {
        return Err(Error::Shape(format!(
            "mask width {} vs k-space width {}",
            mask.width(),
            k.width()
        )));
    }
    let w = k.width();
    for (i, v) in k.data_mut().iter_mut().enumerate() {
        if !mask.is_sampled(i % w) {
            *v = Complex64::new(0.0, 0.0);
        }
    }
    Ok(())
}

fn add_noise(k: &mut KSpace, mask: &CartesianMask, noise: &NoiseModel) -> Result<()> {
    if noise.sigma == 0.0 {
        return Ok(());
    }
    let normal =
        Normal::new(0.0, noise.sigma).map_err(|e| Error::config("noise_sigma", e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    let w = k.width();
    for (i, v) in k.data_mut().iter_mut().enumerate() {
        if mask.is_sampled(i % w) {
            *v += Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng));
        }
    }
    Ok(())
}

/// Fully sampled encoding: `F x` (single-coil) or `F (S_c x)` per coil.
pub fn encode(x: &ComplexImage, sens: Option<&CoilSensitivities>) -> Result<KSpace> {
    match sens {
        None => fft2c(x),
        Some(s) => {
            s.check_image(x.height(), x.width())?;
            let (h, w) = (x.height(), x.width());
            let mut data = Vec::with_capacity(s.coils * h * w);
            for c in 0..s.coils {
                let weighted: Vec<Complex64> =
                    s.map(c).iter().zip(x.data()).map(|(a, b)| a * b).collect();
                data.extend(centered_fft(&weighted, h, w, FftDirection::Forward));
            }
            KSpace::new(s.coils, h, w, data)
        }
    }
}

/// Adjoint of the fully sampled encoding: `F^-1 z` or `sum_c conj(S_c) F^-1 z_c`.
pub fn adjoint(z: &KSpace, sens: Option<&CoilSensitivities>) -> Result<ComplexImage> {
    match sens {
        None => ifft2c(z),
        Some(s) => coil_combine(z, s),
    }
}

/// `y = D F x + eps`, zero-filled off the mask.
pub fn forward_single(
    x: &ComplexImage,
    mask: &CartesianMask,
    noise: &NoiseModel,
) -> Result<KSpace> {
    let mut k = fft2c(x)?;
    apply_mask(&mut k, mask)?;
    add_noise(&mut k, mask, noise)?;
    Ok(k)
}

/// `y_c = D F (S_c x) + eps_c` for every coil.
pub fn forward_multi(
    x: &ComplexImage,
    sens: &CoilSensitivities,
    mask: &CartesianMask,
    noise: &NoiseModel,
) -> Result<KSpace> {
    sens.validate()?;
    let mut k = encode(x, Some(sens))?;
    apply_mask(&mut k, mask)?;
    add_noise(&mut k, mask, noise)?;
    Ok(k)
}

/// `sum_c conj(S_c) * ifft2c(z_c)`.
pub fn coil_combine(z: &KSpace, sens: &CoilSensitivities) -> Result<ComplexImage> {
    if z.coils() != sens.coils {
        return Err(Error::Shape(format!(
            "{} k-space coils vs {} sensitivity maps",
            z.coils(),
            sens.coils
        )));
    }
    sens.check_image(z.height(), z.width())?;
    let (h, w) = (z.height(), z.width());
    let mut out = vec![Complex64::new(0.0, 0.0); h * w];
    for c in 0..z.coils() {
        let img = centered_fft(z.coil(c), h, w, FftDirection::Inverse);
        for ((o, v), s) in out.iter_mut().zip(&img).zip(sens.map(c)) {
            *o += s.conj() * v;
        }
    }
    ComplexImage::new(h, w, out)
}

/// Smooth Gaussian-bump coil profiles placed at equal angles around the
/// field of view, normalized pixelwise so that `sum_c |S_c|^2 = 1`.
pub fn synth_sensitivities(coils: usize, height: usize, width: usize) -> Result<CoilSensitivities> {
    if coils == 0 {
        return Err(Error::config("coils", "must be at least 1"));
    }
    if height == 0 || width == 0 {
        return Err(Error::Dimension("empty sensitivity grid".into()));
    }
    const RADIUS: f64 = 0.8;
    const SPREAD: f64 = 0.8;

    let n = height * width;
    let mut data = vec![Complex64::new(0.0, 0.0); coils * n];
    for c in 0..coils {
        let theta = 2.0 * PI * c as f64 / coils as f64;
        let (cx, cy) = (RADIUS * theta.cos(), RADIUS * theta.sin());
        for r in 0..height {
            let y = 1.0 - (2 * r + 1) as f64 / height as f64;
            for col in 0..width {
                let x = (2 * col + 1) as f64 / width as f64 - 1.0;
                let d2 = (x - cx).powi(2) + (y - cy).powi(2);
                let gain = (-d2 / (2.0 * SPREAD * SPREAD)).exp();
                let phase = theta + 0.5 * PI * (x * theta.cos() + y * theta.sin());
                data[c * n + r * width + col] = Complex64::from_polar(gain, phase);
            }
        }
    }
    for i in 0..n {
        let norm: f64 = (0..coils)
            .map(|c| data[c * n + i].norm_sqr())
            .sum::<f64>()
            .sqrt();
        for c in 0..coils {
            data[c * n + i] /= norm;
        }
    }
    CoilSensitivities::new(coils, height, width, data)
}

/// One ellipse of the phantom: intensity, semi-axes, center, rotation (deg).
#[derive(Debug, Clone, Copy)]
struct Ellipse {
    intensity: f64,
    a: f64,
    b: f64,
    x0: f64,
    y0: f64,
    phi_deg: f64,
}

/// The ten-ellipse Shepp-Logan table with the higher-contrast intensities
/// commonly used for imaging (outer skull 1.0, brain 0.2).
const SHEPP_LOGAN: [Ellipse; 10] = [
    Ellipse {
        intensity: 1.0,
        a: 0.69,
        b: 0.92,
        x0: 0.0,
        y0: 0.0,
        phi_deg: 0.0,
    },
    Ellipse {
        intensity: -0.8,
        a: 0.6624,
        b: 0.874,
        x0: 0.0,
        y0: -0.0184,
        phi_deg: 0.0,
    },
    Ellipse {
        intensity: -0.2,
        a: 0.11,
        b: 0.31,
        x0: 0.22,
        y0: 0.0,
        phi_deg: -18.0,
    },
    Ellipse {
        intensity: -0.2,
        a: 0.16,
        b: 0.41,
        x0: -0.22,
        y0: 0.0,
        phi_deg: 18.0,
    },
    Ellipse {
        intensity: 0.1,
        a: 0.21,
        b: 0.25,
        x0: 0.0,
        y0: 0.35,
        phi_deg: 0.0,
    },
    Ellipse {
        intensity: 0.1,
        a: 0.046,
        b: 0.046,
        x0: 0.0,
        y0: 0.1,
        phi_deg: 0.0,
    },
    Ellipse {
        intensity: 0.1,
        a: 0.046,
        b: 0.046,
        x0: 0.0,
        y0: -0.1,
        phi_deg: 0.0,
    },
    Ellipse {
        intensity: 0.1,
        a: 0.046,
        b: 0.023,
        x0: -0.08,
        y0: -0.605,
        phi_deg: 0.0,
    },
    Ellipse {
        intensity: 0.1,
        a: 0.023,
        b: 0.023,
        x0: 0.0,
        y0: -0.606,
        phi_deg: 0.0,
    },
    Ellipse {
        intensity: 0.1,
        a: 0.023,
        b: 0.046,
        x0: 0.06,
        y0: -0.605,
        phi_deg: 0.0,
    },
];

/// Phantom intensity at normalized coordinates `x, y` in `[-1, 1]`
/// (`y` pointing up).
pub fn shepp_logan_value(x: f64, y: f64) -> f64 {
    let v: f64 = SHEPP_LOGAN
        .iter()
        .filter(|e| {
            let (s, c) = e.phi_deg.to_radians().sin_cos();
            let (dx, dy) = (x - e.x0, y - e.y0);
            let u = dx * c + dy * s;
            let v = -dx * s + dy * c;
            (u / e.a).powi(2) + (v / e.b).powi(2) <= 1.0
        })
        .map(|e| e.intensity)
        .sum();
    v.clamp(0.0, 1.0)
}

/// Real-valued phantom sampled at pixel centers, cast to complex.
pub fn shepp_logan(height: usize, width: usize) -> Result<ComplexImage> {
    if height < 8 || width < 8 {
        return Err(Error::Dimension(format!(
            "phantom needs at least 8x8 pixels, got {height}x{width}"
        )));
    }
    let mut values = Vec::with_capacity(height * width);
    for r in 0..height {
        let y = 1.0 - (2 * r + 1) as f64 / height as f64;
        for c in 0..width {
            let x = (2 * c + 1) as f64 / width as f64 - 1.0;
            values.push(shepp_logan_value(x, y));
        }
    }
    ComplexImage::from_real(height, width, &values)
}
