//! Independent oracles shared by the integration tests and the acceptance
//! harness. Nothing here calls the routine it checks; each value is rebuilt
//! from its definition with plain loops.
#![allow(dead_code)]

use comir_diag::contrastive::{
    info_nce_gradient, info_nce_loss, CriticKind, EmbeddingSet, Level, LossConfig, Modality,
    Pairing, ScheduleKind, Step,
};
use comir_diag::embedding::{
    collapse_metrics, mds_fit, sammon_gradient, sammon_stress, sv_spectrum, DissimilarityMatrix,
    DissimilarityMetric, MdsConfig, MdsInit,
};
use comir_diag::metrics::{AmdConfig, SsimConfig};
use comir_diag::registration::{registration_error, RigidTransform};
use comir_diag::toy::{batch_loss_and_gradient, EncoderShape, TwinEncoderParams};
use comir_diag::{Image, Matrix};
use rand::Rng;
use rand_distr::StandardNormal;

pub const FD_STEP: f64 = 1e-5;
pub const FD_SEEDS: u64 = 20;

pub fn rng(seed: u64) -> comir_diag::rng::Rng {
    comir_diag::rng::seeded(seed)
}

pub fn gaussian(rows: usize, cols: usize, rng: &mut impl Rng) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// `‖a − b‖₂ / max(‖a‖₂, ‖b‖₂)`, or the plain difference norm when both
/// vectors are tiny.
pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let n = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    n(&diff) / n(a).max(n(b)).max(1e-12)
}

/// Central differences of `f` around `x`, one coordinate at a time.
pub fn numeric_gradient(x: &[f64], mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|k| {
            probe[k] = x[k] + FD_STEP;
            let up = f(&probe);
            probe[k] = x[k] - FD_STEP;
            let down = f(&probe);
            probe[k] = x[k];
            (up - down) / (2.0 * FD_STEP)
        })
        .collect()
}

fn set(level: Level, modality: Modality, m: Matrix) -> EmbeddingSet {
    EmbeddingSet::new(level, modality, m).unwrap()
}

// ---------------------------------------------------------------- InfoNCE

fn naive_critic(kind: CriticKind, a: &[f64], b: &[f64]) -> f64 {
    match kind {
        CriticKind::GaussianL2 => -a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>(),
        CriticKind::L1 => -a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>(),
        CriticKind::Cosine => {
            let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
            let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
            let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
            dot / (na * nb)
        }
    }
}

/// `−(1/n) Σᵢ log(e^{h(aᵢ,bᵢ)/τ} / denomᵢ)` with raw exponentials.
pub fn naive_info_nce(
    a: &Matrix,
    b: &Matrix,
    critic: CriticKind,
    tau: f64,
    pairing: Pairing,
) -> f64 {
    let n = a.rows();
    let e = |i: usize, j: usize| (naive_critic(critic, a.row(i), b.row(j)) / tau).exp();
    let mut total = 0.0;
    for i in 0..n {
        let denom: f64 = match pairing {
            Pairing::CrossPair => (0..n).map(|j| e(i, j)).sum(),
            Pairing::Diagonal => (0..n).map(|j| e(j, j)).sum(),
        };
        total -= (e(i, i) / denom).ln();
    }
    total / n as f64
}

/// Worst relative difference between the library loss and the naive oracle
/// over `instances` random problems with `n ≤ 6`.
pub fn info_nce_naive_worst(instances: u64) -> f64 {
    let mut worst: f64 = 0.0;
    for seed in 0..instances {
        let mut r = rng(1000 + seed);
        let n = r.gen_range(1..=6);
        let d = r.gen_range(1..=5);
        let tau = r.gen_range(0.2..2.0);
        let a = gaussian(n, d, &mut r).scale(0.7);
        let b = gaussian(n, d, &mut r).scale(0.7);
        for critic in CriticKind::ALL {
            for pairing in [Pairing::Diagonal, Pairing::CrossPair] {
                let cfg = LossConfig::new(critic, tau, pairing).unwrap();
                let got = info_nce_loss(
                    &set(Level::Final, Modality::A, a.clone()),
                    &set(Level::Final, Modality::B, b.clone()),
                    &cfg,
                )
                .unwrap();
                let want = naive_info_nce(&a, &b, critic, tau, pairing);
                worst = worst.max((got - want).abs() / want.abs().max(1.0));
            }
        }
    }
    worst
}

/// Finite-difference check of both InfoNCE gradients for one seeded
/// instance.
pub fn info_nce_fd(seed: u64, critic: CriticKind, pairing: Pairing) -> f64 {
    let mut r = rng(seed);
    let (n, d) = (5, 4);
    let tau = r.gen_range(0.3..1.5);
    let a = gaussian(n, d, &mut r);
    let b = gaussian(n, d, &mut r);
    let cfg = LossConfig::new(critic, tau, pairing).unwrap();
    let (ga, gb) = info_nce_gradient(
        &set(Level::Final, Modality::A, a.clone()),
        &set(Level::Final, Modality::B, b.clone()),
        &cfg,
    )
    .unwrap();
    let loss = |xa: &[f64], xb: &[f64]| {
        info_nce_loss(
            &set(
                Level::Final,
                Modality::A,
                Matrix::from_vec(n, d, xa.to_vec()).unwrap(),
            ),
            &set(
                Level::Final,
                Modality::B,
                Matrix::from_vec(n, d, xb.to_vec()).unwrap(),
            ),
            &cfg,
        )
        .unwrap()
    };
    let na = numeric_gradient(a.as_slice(), |x| loss(x, b.as_slice()));
    let nb = numeric_gradient(b.as_slice(), |x| loss(a.as_slice(), x));
    rel_err(ga.as_slice(), &na).max(rel_err(gb.as_slice(), &nb))
}

// ------------------------------------------------------------ toy encoder

/// Schedules with the step at which each is checked, chosen so that every
/// combination of active terms occurs.
pub fn schedule_cases() -> Vec<(ScheduleKind, Step)> {
    let step = |epoch, iteration| Step {
        epoch,
        iteration,
        total_epochs: 4,
    };
    vec![
        (ScheduleKind::Baseline, step(1, 5)),
        (ScheduleKind::Alternating { weight: 0.7 }, step(0, 3)),
        (ScheduleKind::Summed { alpha: 0.4 }, step(2, 9)),
        (ScheduleKind::Pretraining { split_epoch: 2 }, step(1, 4)),
    ]
}

/// Finite-difference check of the parameter gradient of the scheduled
/// batch loss, across all four weight tensors.
pub fn toy_fd(seed: u64, schedule: ScheduleKind, step: Step) -> f64 {
    let mut r = rng(seed);
    let (n, p) = (6, 5);
    let shape = EncoderShape {
        bottleneck_dim: 3,
        output_dim: 4,
    };
    let params = TwinEncoderParams::init(p, shape, seed);
    let xa = gaussian(n, p, &mut r);
    let xb = gaussian(n, p, &mut r);
    let cfg_final = LossConfig::new(CriticKind::GaussianL2, 0.5, Pairing::CrossPair).unwrap();
    let cfg_bn = LossConfig::new(CriticKind::Cosine, 0.7, Pairing::Diagonal).unwrap();
    let (_, grads) =
        batch_loss_and_gradient(&params, &xa, &xb, &cfg_final, &cfg_bn, &schedule, step).unwrap();

    let flat = |t: &TwinEncoderParams| {
        t.tensors()
            .iter()
            .flat_map(|m| m.as_slice().to_vec())
            .collect::<Vec<_>>()
    };
    let unflat = |x: &[f64]| {
        let mut q = params.clone();
        let mut k = 0;
        for m in q.tensors_mut() {
            let len = m.as_slice().len();
            m.as_mut_slice().copy_from_slice(&x[k..k + len]);
            k += len;
        }
        q
    };
    let numeric = numeric_gradient(&flat(&params), |x| {
        batch_loss_and_gradient(&unflat(x), &xa, &xb, &cfg_final, &cfg_bn, &schedule, step)
            .unwrap()
            .0
            .loss
    });
    rel_err(&flat(&grads), &numeric)
}

// ------------------------------------------------------------------ Sammon

pub fn sammon_fd(seed: u64) -> f64 {
    let mut r = rng(seed);
    let n = 8;
    let items = gaussian(n, 4, &mut r);
    let delta = DissimilarityMatrix::from_rows(&items, DissimilarityMetric::Euclidean).unwrap();
    let points = gaussian(n, 2, &mut r);
    let g = sammon_gradient(&delta, &points).unwrap();
    assert_eq!(g.coincident_pairs, 0);
    let numeric = numeric_gradient(points.as_slice(), |x| {
        sammon_stress(&delta, &Matrix::from_vec(n, 2, x.to_vec()).unwrap()).unwrap()
    });
    rel_err(g.gradient.as_slice(), &numeric)
}

/// Worst finite-difference error over every gradient family, with the
/// number of instances checked.
pub fn all_gradient_suites() -> (f64, usize) {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for seed in 0..FD_SEEDS {
        for critic in CriticKind::ALL {
            for pairing in [Pairing::Diagonal, Pairing::CrossPair] {
                worst = worst.max(info_nce_fd(seed, critic, pairing));
                count += 1;
            }
        }
        for (schedule, step) in schedule_cases() {
            worst = worst.max(toy_fd(seed, schedule, step));
            count += 1;
        }
        worst = worst.max(sammon_fd(seed));
        count += 1;
    }
    (worst, count)
}

// ------------------------------------------------------------ registration

/// Worst deviation of the corner error from `√(Δtx² + Δty²)` for pure
/// translations and from `2r·sin(|θ|/2)` for pure rotations about the
/// image centre, `r` being the half-diagonal.
pub fn registration_closed_form_worst(cases: u64) -> f64 {
    let mut worst: f64 = 0.0;
    for seed in 0..cases {
        let mut r = rng(7000 + seed);
        let (w, h) = (r.gen_range(2..2000), r.gen_range(2..2000));
        let c = RigidTransform::image_center(w, h);
        let base = RigidTransform::new(0.0, r.gen_range(-50.0..50.0), r.gen_range(-50.0..50.0), c)
            .unwrap();
        let (dx, dy) = (r.gen_range(-200.0..200.0), r.gen_range(-200.0..200.0));
        let moved = RigidTransform::new(0.0, base.tx + dx, base.ty + dy, c).unwrap();
        let got = registration_error(&moved, &base, w, h);
        worst = worst.max((got - dx.hypot(dy)).abs());

        let theta = r.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
        let rot = RigidTransform::new(theta, 0.0, 0.0, c).unwrap();
        let radius = 0.5 * ((w - 1) as f64).hypot((h - 1) as f64);
        let want = 2.0 * radius * (theta.abs() / 2.0).sin();
        let got = registration_error(&rot, &RigidTransform::new(0.0, 0.0, 0.0, c).unwrap(), w, h);
        worst = worst.max((got - want).abs());
    }
    worst
}

// ----------------------------------------------------------------- metrics

pub fn random_image(w: usize, h: usize, seed: u64) -> Image {
    let mut r = rng(seed);
    Image::from_fn(w, h, |_, _| r.gen::<f64>()).unwrap()
}

pub fn oracle_mse(a: &Image, b: &Image) -> f64 {
    let d = a.data();
    d.iter()
        .zip(b.data())
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        / d.len() as f64
}

pub fn oracle_pcc(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    sxy / (sxx.sqrt() * syy.sqrt())
}

/// Mean local SSIM, each window's weighted moments summed directly over
/// the 2-D Gaussian window.
pub fn oracle_ssim(a: &Image, b: &Image, cfg: &SsimConfig) -> f64 {
    let k = cfg.window_size;
    let r = (k / 2) as f64;
    let mut wts = vec![0.0; k * k];
    for j in 0..k {
        for i in 0..k {
            let (dx, dy) = (i as f64 - r, j as f64 - r);
            wts[j * k + i] = (-(dx * dx + dy * dy) / (2.0 * cfg.gaussian_sigma.powi(2))).exp();
        }
    }
    let total: f64 = wts.iter().sum();
    wts.iter_mut().for_each(|w| *w /= total);
    let c1 = (0.01 * cfg.dynamic_range).powi(2);
    let c2 = (0.03 * cfg.dynamic_range).powi(2);
    let mut sum = 0.0;
    let mut count = 0;
    for y0 in 0..=a.height() - k {
        for x0 in 0..=a.width() - k {
            let px = |img: &Image, i: usize, j: usize| img.get(x0 + i, y0 + j);
            let mut mu = [0.0; 2];
            for j in 0..k {
                for i in 0..k {
                    mu[0] += wts[j * k + i] * px(a, i, j);
                    mu[1] += wts[j * k + i] * px(b, i, j);
                }
            }
            let (mut va, mut vb, mut cov) = (0.0, 0.0, 0.0);
            for j in 0..k {
                for i in 0..k {
                    let (da, db) = (px(a, i, j) - mu[0], px(b, i, j) - mu[1]);
                    va += wts[j * k + i] * da * da;
                    vb += wts[j * k + i] * db * db;
                    cov += wts[j * k + i] * da * db;
                }
            }
            sum += ((2.0 * mu[0] * mu[1] + c1) * (2.0 * cov + c2))
                / ((mu[0].powi(2) + mu[1].powi(2) + c1) * (va + vb + c2));
            count += 1;
        }
    }
    sum / count as f64
}

/// α-AMD with nearest points found by exhaustive search.
pub fn oracle_alpha_amd(a: &Image, b: &Image, cfg: &AmdConfig) -> f64 {
    let (w, h) = (a.width(), a.height());
    let members = |img: &Image, q: usize| -> Vec<(f64, f64)> {
        let cut = (q as f64 - 0.5) / cfg.levels as f64;
        (0..h)
            .flat_map(|y| (0..w).map(move |x| (x, y)))
            .filter(|&(x, y)| img.get(x, y) >= cut)
            .map(|(x, y)| (x as f64, y as f64))
            .collect()
    };
    let directed = |from: &Image, to: &Image| -> (f64, usize) {
        let mut sum = 0.0;
        let mut count = 0;
        for q in 1..=cfg.levels {
            let dst = members(to, q);
            for (x, y) in members(from, q) {
                let nearest = dst
                    .iter()
                    .map(|&(u, v)| (x - u).hypot(y - v))
                    .fold(f64::INFINITY, f64::min);
                sum += nearest.min(cfg.alpha);
                count += 1;
            }
        }
        (sum, count)
    };
    let (sab, nab) = directed(a, b);
    let (sba, nba) = directed(b, a);
    let mean = |s: f64, n: usize, other: usize| match (n, other) {
        (0, 0) => 0.0,
        (0, _) => cfg.alpha,
        _ => s / n as f64,
    };
    0.5 * (mean(sab, nab, nba) + mean(sba, nba, nab))
}

/// `(μA − μB)² + (σA − σB)²` for scalar features with unbiased variances.
pub fn oracle_frechet_1d(a: &[f64], b: &[f64]) -> f64 {
    let stats = |v: &[f64]| {
        let n = v.len() as f64;
        let m = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, var.sqrt())
    };
    let (ma, sa) = stats(a);
    let (mb, sb) = stats(b);
    (ma - mb).powi(2) + (sa - sb).powi(2)
}

// --------------------------------------------------------------- embedding

/// Sammon fit of a planar 20-point configuration from a random start.
/// Returns `(final stress, iterations, history is nonincreasing)`.
pub fn planar_mds(seed: u64) -> (f64, usize, bool) {
    let mut r = rng(seed);
    let items = Matrix::from_fn(20, 2, |_, _| r.gen_range(-5.0..5.0));
    let delta = DissimilarityMatrix::from_rows(&items, DissimilarityMetric::Euclidean).unwrap();
    let cfg = MdsConfig {
        max_iters: 2000,
        init: MdsInit::Random,
        seed,
        ..MdsConfig::default()
    };
    let sol = mds_fit(&delta, &cfg).unwrap();
    let monotone = sol.stress_history.windows(2).all(|w| w[1] <= w[0]);
    (sol.final_stress, sol.iterations_used, monotone)
}

/// Random `d × d` rotation from the QR factor of a Gaussian matrix.
pub fn random_rotation(d: usize, r: &mut impl Rng) -> Matrix {
    let g = nalgebra::DMatrix::from_fn(d, d, |_, _| r.sample::<f64, _>(StandardNormal));
    let q = g.qr().q();
    Matrix::from_fn(d, d, |i, j| q[(i, j)])
}

/// Isotropic rank-`k` data in `d` dimensions: `n` Gaussian samples in a
/// random `k`-dimensional subspace.
pub fn rank_k_data(n: usize, d: usize, k: usize, seed: u64) -> Matrix {
    let mut r = rng(seed);
    let latent = gaussian(n, k, &mut r);
    let rot = random_rotation(d, &mut r);
    let basis = Matrix::from_fn(k, d, |i, j| rot[(i, j)]);
    latent.matmul(&basis).unwrap()
}

/// `(values below 1e-10·σ₁, effective rank)` of rank-`k` data.
pub fn collapse_probe(n: usize, d: usize, k: usize, seed: u64) -> (usize, f64, usize) {
    let spectrum = sv_spectrum(&rank_k_data(n, d, k, seed)).unwrap();
    let tiny = spectrum
        .values()
        .iter()
        .filter(|&&s| s < 1e-10 * spectrum.largest())
        .count();
    let m = collapse_metrics(&spectrum, 1e-10).unwrap();
    (tiny, m.effective_rank, m.collapsed_dims)
}
