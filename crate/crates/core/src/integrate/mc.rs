//! Seeded Monte Carlo estimators on the ball and sphere.
//!
//! Samples are grouped in fixed-size chunks. Chunk `i` draws from the ChaCha8
//! stream `i` of the configured seed, so every sample is a function of
//! `(seed, sample index)` alone. Per-chunk statistics are merged in chunk
//! order, which makes estimates bit-identical for any worker count.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Params;
use crate::ballgeom::{involution_vec, BallPoint, CVector, Coords, SpherePoint};
use crate::error::{Error, Result};

/// Samples per independent random stream.
pub const CHUNK_SAMPLES: u64 = 8192;

/// Smallest sample count accepted for a reported estimate.
pub const MIN_REPORTED_SAMPLES: u64 = 1000;

pub type Stream = ChaCha8Rng;

/// The random stream with index `index` under `seed`.
pub fn stream(seed: u64, index: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// How the radius of a `v_α`-distributed point is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RadialScheme {
    /// Uniform point of `v`, weighted by `c_α (1 − |z|²)^α`.
    #[default]
    ImportanceWeight,
    /// `|z|² ~ Beta(n, α + 1)`, which is exactly `v_α`; weight 1.
    BetaRadius,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MCConfig {
    pub samples: u64,
    pub seed: u64,
    pub workers: usize,
    #[serde(default)]
    pub radial: RadialScheme,
}

impl MCConfig {
    pub fn new(samples: u64, seed: u64) -> Self {
        Self {
            samples,
            seed,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            radial: RadialScheme::default(),
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_radial(mut self, radial: RadialScheme) -> Self {
        self.radial = radial;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples < MIN_REPORTED_SAMPLES {
            return Err(Error::Domain(format!(
                "at least {MIN_REPORTED_SAMPLES} samples are required, got {}",
                self.samples
            )));
        }
        if self.workers == 0 {
            return Err(Error::Domain("workers must be >= 1".into()));
        }
        Ok(())
    }
}

/// A Monte Carlo estimate: sample mean, its standard error, the sample count
/// and the seed that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MCEstimate {
    pub value: Complex64,
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
}

impl MCEstimate {
    /// `|value − target| ≤ k · stderr`.
    pub fn within_sigma(&self, target: Complex64, k: f64) -> bool {
        (self.value - target).norm() <= k * self.stderr
    }

    /// The modulus of the estimate with its standard error multiplied by
    /// `scale`; the error bound carries over since `||x| − |y|| ≤ |x − y|`.
    pub fn modulus_scaled(&self, scale: f64) -> MCEstimate {
        MCEstimate {
            value: Complex64::new(scale * self.value.norm(), 0.0),
            stderr: scale * self.stderr,
            ..*self
        }
    }

    pub fn scaled(&self, scale: f64) -> MCEstimate {
        MCEstimate {
            value: self.value * scale,
            stderr: self.stderr * scale.abs(),
            ..*self
        }
    }
}

#[derive(Clone, Copy, Default)]
struct Moments {
    count: u64,
    mean: Complex64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: Complex64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += (delta.conj() * (x - self.mean)).re;
    }

    fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        let total = self.count + other.count;
        let delta = other.mean - self.mean;
        let w = other.count as f64 / total as f64;
        self.m2 += other.m2 + delta.norm_sqr() * self.count as f64 * w;
        self.mean += delta * w;
        self.count = total;
    }
}

/// Vector-valued Monte Carlo mean of `width` complex outputs per sample.
///
/// `f` receives the sample's random stream and writes its outputs into the
/// slice; it is called once per sample index.
pub fn mc_mean_vec<F>(cfg: &MCConfig, width: usize, f: F) -> Result<Vec<MCEstimate>>
where
    F: Fn(&mut Stream, &mut [Complex64]) + Sync,
{
    cfg.validate()?;
    let chunks = cfg.samples.div_ceil(CHUNK_SAMPLES);
    let run_chunk = |chunk: u64| -> std::result::Result<Vec<Moments>, u64> {
        let mut rng = stream(cfg.seed, chunk);
        let start = chunk * CHUNK_SAMPLES;
        let end = (start + CHUNK_SAMPLES).min(cfg.samples);
        let mut moments = vec![Moments::default(); width];
        let mut buf = vec![Complex64::new(0.0, 0.0); width];
        for index in start..end {
            f(&mut rng, &mut buf);
            for (m, x) in moments.iter_mut().zip(&buf) {
                if !(x.re.is_finite() && x.im.is_finite()) {
                    return Err(index);
                }
                m.push(*x);
            }
        }
        Ok(moments)
    };

    let per_chunk: Vec<std::result::Result<Vec<Moments>, u64>> = if cfg.workers == 1 {
        (0..chunks).map(run_chunk).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| Error::Domain(format!("cannot start worker pool: {e}")))?;
        pool.install(|| (0..chunks).into_par_iter().map(run_chunk).collect())
    };

    let mut total = vec![Moments::default(); width];
    for chunk in per_chunk {
        let chunk = chunk.map_err(|index| Error::NonFinite { index })?;
        for (t, c) in total.iter_mut().zip(&chunk) {
            t.merge(c);
        }
    }
    Ok(total
        .into_iter()
        .map(|m| {
            let var = if m.count > 1 {
                m.m2 / (m.count - 1) as f64
            } else {
                0.0
            };
            MCEstimate {
                value: m.mean,
                stderr: (var / m.count as f64).sqrt(),
                samples: m.count,
                seed: cfg.seed,
            }
        })
        .collect())
}

fn gaussian_direction(n: usize, rng: &mut Stream) -> (Coords, f64) {
    loop {
        let coords: Coords = (0..n)
            .map(|_| {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                Complex64::new(re, im)
            })
            .collect();
        let norm = coords.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-300 {
            return (coords, norm);
        }
    }
}

fn point_at_radius(n: usize, r: f64, rng: &mut Stream) -> BallPoint {
    let (coords, norm) = gaussian_direction(n, rng);
    let s = r / norm;
    let v = CVector::from_coords(coords.into_iter().map(|c| c * s).collect());
    if v.norm_sq() < 1.0 {
        BallPoint::new_unchecked(v)
    } else {
        // rounding pushed a radius of 1 − 2⁻⁵³ onto the sphere
        let s = (1.0 - f64::EPSILON) / v.norm();
        BallPoint::new_unchecked(v.scale_real(s))
    }
}

/// A point uniformly distributed with respect to normalized volume `v`.
pub fn sample_ball(n: usize, rng: &mut Stream) -> BallPoint {
    let u: f64 = rng.random();
    let r = u.powf(1.0 / (2.0 * n as f64));
    point_at_radius(n, r, rng)
}

/// A point uniformly distributed with respect to `σ`.
pub fn sample_sphere(n: usize, rng: &mut Stream) -> SpherePoint {
    let (coords, norm) = gaussian_direction(n, rng);
    let v = CVector::from_coords(coords.into_iter().map(|c| c / norm).collect());
    SpherePoint::new(v).expect("normalized gaussian vector lies on the sphere")
}

/// A point distributed exactly as `v_α` (`|z|² ~ Beta(n, α + 1)`).
pub fn sample_valpha(params: &Params, rng: &mut Stream) -> BallPoint {
    let beta = Beta::new(params.n() as f64, params.alpha() + 1.0)
        .expect("Beta(n, α+1) has positive parameters");
    let r = beta.sample(rng).sqrt();
    point_at_radius(params.n(), r, rng)
}

struct ValphaSampler {
    n: usize,
    alpha: f64,
    c_alpha: f64,
    beta: Option<Beta<f64>>,
}

impl ValphaSampler {
    fn new(params: &Params, scheme: RadialScheme) -> Self {
        let beta = match scheme {
            RadialScheme::ImportanceWeight => None,
            RadialScheme::BetaRadius => Some(
                Beta::new(params.n() as f64, params.alpha() + 1.0)
                    .expect("Beta(n, α+1) has positive parameters"),
            ),
        };
        Self {
            n: params.n(),
            alpha: params.alpha(),
            c_alpha: params.c_alpha(),
            beta,
        }
    }

    /// A point and its weight relative to `v_α`.
    fn draw(&self, rng: &mut Stream) -> (BallPoint, f64) {
        match &self.beta {
            Some(beta) => {
                let r = beta.sample(rng).sqrt();
                (point_at_radius(self.n, r, rng), 1.0)
            }
            None => {
                let z = sample_ball(self.n, rng);
                let w = if self.alpha == 0.0 {
                    1.0
                } else {
                    self.c_alpha * (1.0 - z.norm_sq()).powf(self.alpha)
                };
                (z, w)
            }
        }
    }
}

/// Vector-valued `∫_B f dv_α`.
pub fn mc_integral_valpha_vec<F>(
    width: usize,
    f: F,
    params: &Params,
    cfg: &MCConfig,
) -> Result<Vec<MCEstimate>>
where
    F: Fn(&BallPoint, &mut [Complex64]) + Sync,
{
    let sampler = ValphaSampler::new(params, cfg.radial);
    mc_mean_vec(cfg, width, |rng, out| {
        let (z, weight) = sampler.draw(rng);
        f(&z, out);
        if weight != 1.0 {
            for x in out.iter_mut() {
                *x *= weight;
            }
        }
    })
}

/// `∫_B f dv_α` as the mean of `f(z)·c_α(1 − |z|²)^α` over uniform draws
/// (or of `f(z)` over exact `v_α` draws with [`RadialScheme::BetaRadius`]).
pub fn mc_integral_valpha<F>(f: F, params: &Params, cfg: &MCConfig) -> Result<MCEstimate>
where
    F: Fn(&BallPoint) -> Complex64 + Sync,
{
    let mut out = mc_integral_valpha_vec(1, |z, o| o[0] = f(z), params, cfg)?;
    Ok(out.remove(0))
}

/// Density of `v_α` pulled back through `w = φ_c(ω)`:
/// `dv_α(w) = ((1 − |c|²)/|1 − ⟨c, ω⟩|²)^{n+1+α} dv_α(ω)`.
pub fn recentring_weight(params: &Params, centre: &BallPoint, omega: &BallPoint) -> f64 {
    let d = (Complex64::new(1.0, 0.0) - centre.vector().dot(omega.vector())).norm_sqr();
    ((1.0 - centre.norm_sq()) / d).powf(params.kernel_exponent())
}

/// Vector-valued `∫_B f dv_α` evaluated after the change of variables
/// `w = φ_c(ω)`, which concentrates samples near `c`.
pub fn mc_integral_valpha_vec_recentred<F>(
    width: usize,
    f: F,
    params: &Params,
    centre: &BallPoint,
    cfg: &MCConfig,
) -> Result<Vec<MCEstimate>>
where
    F: Fn(&BallPoint, &mut [Complex64]) + Sync,
{
    centre.vector().check_dim(params.n())?;
    mc_integral_valpha_vec(
        width,
        |omega, out| {
            let mut w = involution_vec(centre.vector(), omega.vector());
            if w.norm_sq() >= 1.0 {
                w = w.scale_real((1.0 - f64::EPSILON) / w.norm());
            }
            let w = BallPoint::new_unchecked(w);
            f(&w, out);
            let jac = recentring_weight(params, centre, omega);
            for x in out.iter_mut() {
                *x *= jac;
            }
        },
        params,
        cfg,
    )
}

/// Scalar form of [`mc_integral_valpha_vec_recentred`].
pub fn mc_integral_valpha_recentred<F>(
    f: F,
    params: &Params,
    centre: &BallPoint,
    cfg: &MCConfig,
) -> Result<MCEstimate>
where
    F: Fn(&BallPoint) -> Complex64 + Sync,
{
    let mut out =
        mc_integral_valpha_vec_recentred(1, |w, o| o[0] = f(w), params, centre, cfg)?;
    Ok(out.remove(0))
}

/// `∫_S f dσ`.
pub fn mc_integral_sphere<F>(f: F, n: usize, cfg: &MCConfig) -> Result<MCEstimate>
where
    F: Fn(&SpherePoint) -> Complex64 + Sync,
{
    let mut out = mc_mean_vec(cfg, 1, |rng, o| {
        let z = sample_sphere(n, rng);
        o[0] = f(&z);
    })?;
    Ok(out.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn cfg(samples: u64, seed: u64) -> MCConfig {
        MCConfig::new(samples, seed)
    }

    #[test]
    fn rejects_tiny_sample_counts() {
        let p = Params::new(1, 1, 0.0).unwrap();
        assert!(mc_integral_valpha(|_| c(1.0), &p, &cfg(10, 1)).is_err());
        assert!(mc_integral_valpha(|_| c(1.0), &p, &cfg(1000, 1).with_workers(0)).is_err());
    }

    #[test]
    fn non_finite_samples_are_reported() {
        let p = Params::new(1, 1, 0.0).unwrap();
        let err = mc_integral_valpha(|_| c(f64::NAN), &p, &cfg(2000, 1)).unwrap_err();
        assert_eq!(err, Error::NonFinite { index: 0 });
    }

    #[test]
    fn ball_moments() {
        for n in 1..=3 {
            let est = mc_mean_vec(&cfg(1_000_000, 11 + n as u64), 3, |rng, out| {
                let z = sample_ball(n, rng);
                out[0] = z.vector()[0];
                out[1] = c(z.norm_sq());
                out[2] = c(z.vector()[0].re.powi(2));
            })
            .unwrap();
            assert!(est[0].within_sigma(c(0.0), 4.0));
            assert!(est[1].within_sigma(c(n as f64 / (n as f64 + 1.0)), 4.0));
            if n == 1 {
                assert!(est[2].within_sigma(c(0.25), 4.0));
            }
        }
    }

    #[test]
    fn sphere_moments() {
        for n in 1..=3 {
            let est = mc_mean_vec(&cfg(1_000_000, 5 + n as u64), 3, |rng, out| {
                let z = sample_sphere(n, rng);
                let z1 = z.vector()[0];
                out[0] = z1;
                out[1] = c(z1.norm_sqr());
                out[2] = c(z1.norm_sqr().powi(2));
            })
            .unwrap();
            assert!(est[0].within_sigma(c(0.0), 4.0));
            assert!(est[1].within_sigma(c(1.0 / n as f64), 4.0));
            if n == 2 {
                assert!(est[2].within_sigma(c(1.0 / 3.0), 4.0));
            }
        }
    }

    #[test]
    fn valpha_examples() {
        let p = Params::new(1, 1, 0.0).unwrap();
        let one = mc_integral_valpha(|_| c(1.0), &p, &cfg(5000, 3)).unwrap();
        assert_eq!(one.value, c(1.0));
        assert_eq!(one.stderr, 0.0);
        let est = mc_integral_valpha(|z| c(z.vector()[0].norm_sqr()), &p, &cfg(1_000_000, 3)).unwrap();
        assert!(est.within_sigma(c(0.5), 4.0));

        let p = Params::new(1, 1, 1.0).unwrap();
        for scheme in [RadialScheme::ImportanceWeight, RadialScheme::BetaRadius] {
            let est = mc_integral_valpha(|z| c(z.norm_sq()), &p, &cfg(1_000_000, 9).with_radial(scheme))
                .unwrap();
            assert!(est.within_sigma(c(1.0 / 3.0), 4.0), "{scheme:?}: {est:?}");
        }
    }

    #[test]
    fn deterministic_across_worker_counts() {
        let p = Params::new(2, 1, 2.5).unwrap();
        let run = |workers| {
            mc_integral_valpha(
                |z| z.vector()[0] * z.vector()[1].conj() + c(z.norm_sq()),
                &p,
                &cfg(100_003, 42).with_workers(workers),
            )
            .unwrap()
        };
        let base = run(1);
        for w in [4, 16] {
            let other = run(w);
            assert_eq!(base.value.re.to_bits(), other.value.re.to_bits());
            assert_eq!(base.value.im.to_bits(), other.value.im.to_bits());
            assert_eq!(base.stderr.to_bits(), other.stderr.to_bits());
        }
    }

    #[test]
    fn change_of_variables_matches_direct_sampling() {
        // f(w) = |1 − ⟨z, w⟩|^{−(n+1+α−N)} with (n, N, α) = (1, 1, 0), z = 0.7
        let p = Params::new(1, 1, 0.0).unwrap();
        let z = BallPoint::on_first_axis(1, 0.7).unwrap();
        let s = p.kernel_exponent() - p.order() as f64;
        let f = |w: &BallPoint| {
            let d = (c(1.0) - z.vector().dot(w.vector())).norm();
            c(d.powf(-s))
        };
        let direct = mc_integral_valpha(f, &p, &cfg(1_000_000, 21)).unwrap();
        let moved = mc_integral_valpha_recentred(f, &p, &z, &cfg(1_000_000, 22)).unwrap();
        let sigma = (direct.stderr.powi(2) + moved.stderr.powi(2)).sqrt();
        assert!((direct.value - moved.value).norm() <= 4.0 * sigma, "{direct:?} vs {moved:?}");
    }

    #[test]
    fn recentring_at_origin_is_a_reflection() {
        let p = Params::new(2, 1, 0.5).unwrap();
        let o = BallPoint::origin(2);
        let f = |w: &BallPoint| w.vector()[0] + c(w.norm_sq());
        let a = mc_integral_valpha(f, &p, &cfg(20_000, 8)).unwrap();
        // φ₀ = −Id maps the same samples to their antipodes
        let b = mc_integral_valpha_recentred(
            |w| f(&BallPoint::new(-w.vector()).unwrap()),
            &p,
            &o,
            &cfg(20_000, 8),
        )
        .unwrap();
        assert!((a.value - b.value).norm() < 1e-12);
    }
}
