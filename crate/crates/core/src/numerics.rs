//! Complex grids and the centered, orthonormal 2D Fourier transform.
//!
//! Convention: the DC sample sits at `(H/2, W/2)` (integer division) in
//! k-space and the transform is scaled by `1/sqrt(H*W)` in both directions,
//! so `fft2c` is unitary.

use std::cell::RefCell;

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

use crate::error::{Error, Result};

/// An `H x W` image in the spatial domain, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexImage {
    height: usize,
    width: usize,
    data: Vec<Complex64>,
}

impl ComplexImage {
    pub fn new(height: usize, width: usize, data: Vec<Complex64>) -> Result<Self> {
        check_dims(height, width)?;
        if data.len() != height * width {
            return Err(Error::Shape(format!(
                "image data has {} values, expected {}x{}",
                data.len(),
                height,
                width
            )));
        }
        check_finite(&data)?;
        Ok(Self {
            height,
            width,
            data,
        })
    }

    pub fn zeros(height: usize, width: usize) -> Self {
        Self {
            height,
            width,
            data: vec![Complex64::new(0.0, 0.0); height * width],
        }
    }

    pub fn from_real(height: usize, width: usize, values: &[f64]) -> Result<Self> {
        Self::new(
            height,
            width,
            values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        )
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.width + col]
    }

    pub fn magnitude(&self) -> Vec<f64> {
        self.data.iter().map(|v| v.norm()).collect()
    }

    pub fn norm(&self) -> f64 {
        l2_norm(&self.data)
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.data)
    }

    /// Largest elementwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &ComplexImage) -> f64 {
        max_abs_diff(&self.data, &other.data)
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            height: self.height,
            width: self.width,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn same_shape(&self, other: &ComplexImage) -> Result<()> {
        if self.height != other.height || self.width != other.width {
            return Err(Error::Shape(format!(
                "{}x{} image vs {}x{} image",
                self.height, self.width, other.height, other.width
            )));
        }
        Ok(())
    }
}

/// Stacked per-coil k-space, `coils x H x W`, row-major within each coil.
#[derive(Debug, Clone, PartialEq)]
pub struct KSpace {
    coils: usize,
    height: usize,
    width: usize,
    data: Vec<Complex64>,
}

impl KSpace {
    pub fn new(coils: usize, height: usize, width: usize, data: Vec<Complex64>) -> Result<Self> {
        check_dims(height, width)?;
        if coils == 0 {
            return Err(Error::Dimension("k-space needs at least one coil".into()));
        }
        if data.len() != coils * height * width {
            return Err(Error::Shape(format!(
                "k-space data has {} values, expected {}x{}x{}",
                data.len(),
                coils,
                height,
                width
            )));
        }
        check_finite(&data)?;
        Ok(Self {
            coils,
            height,
            width,
            data,
        })
    }

    pub fn zeros(coils: usize, height: usize, width: usize) -> Self {
        Self {
            coils,
            height,
            width,
            data: vec![Complex64::new(0.0, 0.0); coils * height * width],
        }
    }

    /// Stacks single-coil k-spaces of identical geometry.
    pub fn stack(parts: Vec<KSpace>) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::Dimension("cannot stack zero coils".into()))?;
        let (height, width) = (first.height, first.width);
        let mut data = Vec::with_capacity(parts.len() * height * width);
        let mut coils = 0;
        for part in &parts {
            if part.height != height || part.width != width {
                return Err(Error::Shape("stacked coils differ in geometry".into()));
            }
            coils += part.coils;
            data.extend_from_slice(&part.data);
        }
        Ok(Self {
            coils,
            height,
            width,
            data,
        })
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

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn coil(&self, c: usize) -> &[Complex64] {
        let n = self.height * self.width;
        &self.data[c * n..(c + 1) * n]
    }

    /// Copies coil `c` out as a single-coil k-space.
    pub fn coil_kspace(&self, c: usize) -> KSpace {
        KSpace {
            coils: 1,
            height: self.height,
            width: self.width,
            data: self.coil(c).to_vec(),
        }
    }

    pub fn norm(&self) -> f64 {
        l2_norm(&self.data)
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.data)
    }

    pub fn max_abs_diff(&self, other: &KSpace) -> f64 {
        max_abs_diff(&self.data, &other.data)
    }

    pub fn same_shape(&self, other: &KSpace) -> Result<()> {
        if self.coils != other.coils || self.height != other.height || self.width != other.width {
            return Err(Error::Shape(format!(
                "{}x{}x{} k-space vs {}x{}x{} k-space",
                self.coils, self.height, self.width, other.coils, other.height, other.width
            )));
        }
        Ok(())
    }
}

fn check_dims(height: usize, width: usize) -> Result<()> {
    if height == 0 || width == 0 {
        return Err(Error::Dimension(format!(
            "grid must be non-empty, got {height}x{width}"
        )));
    }
    Ok(())
}

fn check_finite(data: &[Complex64]) -> Result<()> {
    match data
        .iter()
        .position(|v| !v.re.is_finite() || !v.im.is_finite())
    {
        Some(i) => Err(Error::NonFinite(i)),
        None => Ok(()),
    }
}

pub(crate) fn l2_norm(data: &[Complex64]) -> f64 {
    data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn max_abs(data: &[Complex64]) -> f64 {
    data.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

pub(crate) fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Centered orthonormal forward transform of a single image.
pub fn fft2c(img: &ComplexImage) -> Result<KSpace> {
    check_dims(img.height, img.width)?;
    let data = centered_fft(&img.data, img.height, img.width, FftDirection::Forward);
    Ok(KSpace {
        coils: 1,
        height: img.height,
        width: img.width,
        data,
    })
}

/// Exact inverse of [`fft2c`]. Multi-coil data must be split per coil first.
pub fn ifft2c(k: &KSpace) -> Result<ComplexImage> {
    if k.coils != 1 {
        return Err(Error::Shape(format!(
            "ifft2c expects single-coil k-space, got {} coils",
            k.coils
        )));
    }
    Ok(ComplexImage {
        height: k.height,
        width: k.width,
        data: centered_fft(&k.data, k.height, k.width, FftDirection::Inverse),
    })
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Raw centered transform over a row-major `height x width` slice.
pub(crate) fn centered_fft(
    input: &[Complex64],
    height: usize,
    width: usize,
    direction: FftDirection,
) -> Vec<Complex64> {
    // ifftshift: moves index n/2 to 0
    let mut buf = vec![Complex64::new(0.0, 0.0); height * width];
    for r in 0..height {
        let src_r = (r + height / 2) % height;
        for c in 0..width {
            let src_c = (c + width / 2) % width;
            buf[r * width + c] = input[src_r * width + src_c];
        }
    }

    let (row_fft, col_fft) = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        (p.plan_fft(width, direction), p.plan_fft(height, direction))
    });
    row_fft.process(&mut buf);

    // columns are transformed as rows of the transpose
    let mut transposed = vec![Complex64::new(0.0, 0.0); height * width];
    for r in 0..height {
        for c in 0..width {
            transposed[c * height + r] = buf[r * width + c];
        }
    }
    col_fft.process(&mut transposed);

    // fftshift and orthonormal scaling
    let scale = 1.0 / ((height * width) as f64).sqrt();
    let mut out = buf;
    for r in 0..height {
        let dst_r = (r + height / 2) % height;
        for c in 0..width {
            let dst_c = (c + width / 2) % width;
            out[dst_r * width + dst_c] = transposed[c * height + r] * scale;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_image(h: usize, w: usize, seed: u64) -> ComplexImage {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..h * w)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        ComplexImage::new(h, w, data).unwrap()
    }

    #[test]
    fn centered_impulse_has_flat_spectrum() {
        for n in [8usize, 9, 16] {
            let mut img = ComplexImage::zeros(n, n);
            img.data_mut()[(n / 2) * n + n / 2] = Complex64::new(1.0, 0.0);
            let k = fft2c(&img).unwrap();
            for v in k.data() {
                assert!((v.norm() - 1.0 / n as f64).abs() < 1e-12);
                // centered impulse → real, positive spectrum
                assert!((v.re - 1.0 / n as f64).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn flat_spectrum_inverts_to_center_impulse() {
        let n = 12;
        let k = KSpace::new(1, n, n, vec![Complex64::new(1.0 / n as f64, 0.0); n * n]).unwrap();
        let img = ifft2c(&k).unwrap();
        for r in 0..n {
            for c in 0..n {
                let expected = if r == n / 2 && c == n / 2 { 1.0 } else { 0.0 };
                assert!((img.get(r, c) - Complex64::new(expected, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_kspace_gives_zero_image() {
        let img = ifft2c(&KSpace::zeros(1, 5, 7)).unwrap();
        assert!(img.max_abs() == 0.0);
    }

    #[test]
    fn round_trips_both_ways() {
        let x = random_image(32, 32, 1);
        let back = ifft2c(&fft2c(&x).unwrap()).unwrap();
        assert!(back.max_abs_diff(&x) <= 1e-10 * x.max_abs());

        let k = fft2c(&random_image(9, 14, 2)).unwrap();
        let again = fft2c(&ifft2c(&k).unwrap()).unwrap();
        assert!(again.max_abs_diff(&k) <= 1e-10 * k.max_abs());
    }

    #[test]
    fn linear_in_input() {
        let x = random_image(10, 11, 3);
        let y = random_image(10, 11, 4);
        let (a, b) = (Complex64::new(0.3, -1.2), Complex64::new(2.0, 0.5));
        let combo = ComplexImage::new(
            10,
            11,
            x.data()
                .iter()
                .zip(y.data())
                .map(|(p, q)| a * p + b * q)
                .collect(),
        )
        .unwrap();
        let lhs = fft2c(&combo).unwrap();
        let fx = fft2c(&x).unwrap();
        let fy = fft2c(&y).unwrap();
        let rhs: Vec<_> = fx
            .data()
            .iter()
            .zip(fy.data())
            .map(|(p, q)| a * p + b * q)
            .collect();
        assert!(max_abs_diff(lhs.data(), &rhs) <= 1e-10 * max_abs(&rhs));
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(matches!(
            ComplexImage::new(0, 4, vec![]),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(
            ifft2c(&KSpace::zeros(2, 4, 4)),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            ComplexImage::new(1, 2, vec![Complex64::new(f64::NAN, 0.0); 2]),
            Err(Error::NonFinite(0))
        ));
    }
}
