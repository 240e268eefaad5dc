//! Weak unipotence of peripheral images and polynomial growth laws.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::dynamics::{divergence_monitor, log_spaced, power_stacks, DivergenceVerdict};
use super::envelope::{fit_envelope, Direction, FitResult, SlopeConstraint};
use crate::error::{Error, Result};
use crate::group::{Group, RatMatrix, Representation, Symbol};
use crate::linalg::{cyclotomic_certificate, spectral, wedge_power, CartanStack, CyclotomicCertificate};

/// Default numeric tolerance on `||λ| − 1|`.
pub const UNIPOTENT_TOL: f64 = 1e-8;

#[derive(Clone, Debug, Serialize)]
pub struct UnipotentEntry {
    /// Exact verdict; `None` for non-integral input, which has no certificate route.
    pub exact: Option<bool>,
    pub certificate: Option<CyclotomicCertificate>,
    pub numeric: bool,
    /// `max ||λ_i| − 1|` from a floating eigenvalue solve.
    pub max_deviation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct UnipotentReport {
    pub entries: Vec<UnipotentEntry>,
    /// Every matrix passes (exact verdict where available, numeric otherwise).
    pub weakly_unipotent: bool,
    /// Exact and numeric verdicts coincide wherever both exist.
    pub routes_agree: bool,
}

pub fn weakly_unipotent_check(mats: &[RatMatrix], tol: f64) -> Result<UnipotentReport> {
    let mut entries = Vec::with_capacity(mats.len());
    for m in mats {
        let certificate = cyclotomic_certificate(m);
        let exact = m.is_integral().then_some(certificate.is_some());
        let sp = spectral(&m.to_f64())?;
        let max_deviation = sp.lambda.iter().map(|l| (l - 1.0).abs()).fold(0.0, f64::max);
        entries.push(UnipotentEntry { exact, certificate, numeric: max_deviation <= tol, max_deviation });
    }
    let weakly_unipotent = entries.iter().all(|e| e.exact.unwrap_or(e.numeric));
    let routes_agree = entries.iter().all(|e| e.exact.is_none_or(|x| x == e.numeric));
    Ok(UnipotentReport { entries, weakly_unipotent, routes_agree })
}

/// `(N, log μ₁/μ₂([[1,N],[0,1]]), |gap − 2 log N|)`.
pub fn jordan_gap_check(ns: &[u64]) -> Result<Vec<(u64, f64, f64)>> {
    ns.iter()
        .map(|&n| {
            let j = RatMatrix::from_integers(&[&[1, n as i64], &[0, 1]]);
            let gap = CartanStack::from_exact(&j, &[1.0, 1.0])?.mu_gap(1)?;
            Ok((n, gap, (gap - 2.0 * (n as f64).ln()).abs()))
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthPoint {
    pub length: u64,
    pub log_spread: f64,
    pub gap: f64,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum LowerLaw {
    /// Lower envelope of the gap against `ln N`.
    Applicable { fit: FitResult },
    /// A peripheral family has bounded gap, so no lower law of the form
    /// `gap ≥ α ln N − β` with `α > 0` can hold.
    NotApplicable { witness: String, gaps: Vec<(u64, f64)> },
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthLawReport {
    pub peripheral: String,
    pub k: usize,
    pub dim: usize,
    pub unipotent: UnipotentReport,
    pub points: Vec<GrowthPoint>,
    /// Longest word used to freeze the constant.
    pub fit_length: u64,
    /// `log C` in `log μ₁/μ_d ≤ log C + 2(d−1) log N`, frozen on short words.
    pub log_c: f64,
    /// Points beyond `fit_length` exceeding the frozen bound.
    pub upper_violations: usize,
    pub checked: usize,
    pub lower: LowerLaw,
}

#[derive(Clone, Debug)]
pub struct GrowthLawConfig {
    pub max_length: u64,
    pub fit_length: u64,
    pub samples: usize,
    pub witness_max: u64,
    pub seed: u64,
}

impl Default for GrowthLawConfig {
    fn default() -> Self {
        Self { max_length: 10_000, fit_length: 100, samples: 8, witness_max: 4096, seed: 0 }
    }
}

fn random_reduced_word(symbols: &[Symbol], len: usize, rng: &mut ChaCha8Rng) -> Vec<Symbol> {
    let mut w: Vec<Symbol> = Vec::with_capacity(len);
    while w.len() < len {
        let s = symbols[rng.random_range(0..symbols.len())];
        if w.last().is_some_and(|&p| p == s.inverse()) {
            continue;
        }
        w.push(s);
    }
    w
}

/// Checks the polynomial upper law on random peripheral words and decides
/// whether a logarithmic lower law can apply.
pub fn unipotent_growth_laws(
    group: &Group,
    rep: &Representation,
    peripheral: usize,
    k: usize,
    cfg: &GrowthLawConfig,
) -> Result<GrowthLawReport> {
    let per = group
        .peripherals
        .get(peripheral)
        .ok_or_else(|| Error::Config(format!("no peripheral subgroup {peripheral}")))?;
    let d = rep.dim;
    if k == 0 || k >= d {
        return Err(Error::Config(format!("k = {k} outside 1..{d}")));
    }
    if cfg.fit_length == 0 || cfg.fit_length >= cfg.max_length || cfg.samples == 0 {
        return Err(Error::Config("need 0 < fit_length < max_length and samples ≥ 1".into()));
    }
    let images: Vec<RatMatrix> = per.generators.iter().map(|&g| rep.generator_images()[g].clone()).collect();
    let unipotent = weakly_unipotent_check(&images, UNIPOTENT_TOL)?;
    if !unipotent.weakly_unipotent {
        return Err(Error::NotWeaklyUnipotent(format!("peripheral {}", per.id)));
    }
    let symbols: Vec<Symbol> =
        per.generators.iter().flat_map(|&g| [Symbol::new(g, false), Symbol::new(g, true)]).collect();
    let stacks: Vec<CartanStack> =
        symbols.iter().map(|&s| CartanStack::from_exact(rep.symbol_image(s), &rep.basis_scale)).collect::<Result<_>>()?;
    let checkpoints = log_spaced(cfg.max_length, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut points = Vec::with_capacity(checkpoints.len() * cfg.samples);
    for _ in 0..cfg.samples {
        // prefixes of a random reduced word are random reduced words
        let word = random_reduced_word(&symbols, cfg.max_length as usize, &mut rng);
        let mut acc = CartanStack::identity(d);
        let mut next = checkpoints.iter().peekable();
        for (i, s) in word.iter().enumerate() {
            let idx = symbols.iter().position(|t| t == s).expect("drawn from symbols");
            acc.mul_assign(&stacks[idx]);
            if next.peek().is_some_and(|&&n| n == i as u64 + 1) {
                next.next();
                points.push(GrowthPoint { length: i as u64 + 1, log_spread: acc.log_spread(), gap: acc.mu_gap(k)? });
            }
        }
    }
    let exponent = 2.0 * (d as f64 - 1.0);
    let excess = |p: &GrowthPoint| p.log_spread - exponent * (p.length as f64).ln();
    let log_c = points.iter().filter(|p| p.length <= cfg.fit_length).map(excess).fold(f64::NEG_INFINITY, f64::max);
    let late: Vec<&GrowthPoint> = points.iter().filter(|p| p.length > cfg.fit_length).collect();
    let upper_violations = late.iter().filter(|p| excess(p) > log_c + 1e-9).count();
    let lower = lower_law(group, rep, &symbols, k, cfg.witness_max, &points)?;
    Ok(GrowthLawReport {
        peripheral: per.id.clone(),
        k,
        dim: d,
        unipotent,
        fit_length: cfg.fit_length,
        log_c,
        upper_violations,
        checked: late.len(),
        points,
        lower,
    })
}

/// Families `sⁿ`, `(st)ⁿ`, `sⁿtⁿ` over marked symbols; any bounded one refutes a lower law.
fn lower_law(
    group: &Group,
    rep: &Representation,
    symbols: &[Symbol],
    k: usize,
    witness_max: u64,
    points: &[GrowthPoint],
) -> Result<LowerLaw> {
    let ns: Vec<u64> = log_spaced(witness_max, 2).into_iter().filter(|&n| n >= 1).collect();
    let mut families: Vec<(String, Vec<CartanStack>)> = Vec::new();
    for &s in symbols {
        let ms = rep.symbol_image(s);
        families.push((format!("({})^n", group.gens.format(&[s])), power_stacks(rep, ms, &ns)?));
        for &t in symbols {
            if t == s || t == s.inverse() {
                continue;
            }
            let mt = rep.symbol_image(t);
            let name = group.gens.format(&[s, t]);
            families.push((format!("({name})^n"), power_stacks(rep, &ms.mul(mt), &ns)?));
            let ps = power_stacks(rep, ms, &ns)?;
            let pt = power_stacks(rep, mt, &ns)?;
            let split = ps.iter().zip(&pt).map(|(a, b)| a.mul(b)).collect();
            families.push((
                format!("{}^n {}^n", group.gens.format(&[s]), group.gens.format(&[t])),
                split,
            ));
        }
    }
    for (witness, stacks) in families {
        let report = divergence_monitor(&ns, &stacks, k)?;
        if report.verdict == DivergenceVerdict::Bounded {
            let gaps = ns.iter().copied().zip(report.gaps).collect();
            return Ok(LowerLaw::NotApplicable { witness, gaps });
        }
    }
    let (x, y): (Vec<f64>, Vec<f64>) = points.iter().map(|p| ((p.length as f64).ln(), p.gap)).unzip();
    let fit = fit_envelope(&x, &y, Direction::Lower, SlopeConstraint::NonNegative)?;
    Ok(LowerLaw::Applicable { fit })
}

/// `exp(Y)` by the terminating series; rejects `Y` with `Yᵈ ≠ 0`.
pub fn nilpotent_exp(y: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let d = y.nrows();
    if y.ncols() != d {
        return Err(Error::DimensionMismatch { expected: d, got: y.ncols() });
    }
    let scale = y.amax().max(1.0);
    let mut term = DMatrix::identity(d, d);
    let mut sum = term.clone();
    for m in 1..=d {
        term = &term * y / m as f64;
        if m < d {
            sum += &term;
        } else if term.amax() > 1e-9 * scale.powi(d as i32) {
            return Err(Error::NotNilpotent(format!("Y^{d} has an entry of size {:e}", term.amax())));
        }
    }
    Ok(sum)
}

fn log_wedge_frobenius(e: &DMatrix<f64>, j: usize) -> f64 {
    let d = e.nrows();
    if j == 0 || j == d {
        // ∧⁰ is the scalar 1; ∧ᵈ is the determinant, 1 on the unipotent locus
        return if j == 0 { 0.0 } else { e.determinant().abs().ln() };
    }
    let m = e.amax();
    j as f64 * m.ln() + wedge_power(&(e / m), j).norm().ln()
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |r, i| r * (n - i) as f64 / (i + 1) as f64)
}

/// `log R(Y)`, with `R = ‖∧ᵏe^Y‖⁴ / (‖∧^{k+1}e^Y‖² ‖∧^{k−1}e^Y‖²)` in Frobenius
/// norms, divided by its value at `Y = 0`.
pub fn log_r_function(y: &DMatrix<f64>, k: usize) -> Result<f64> {
    let d = y.nrows();
    if k == 0 || k >= d {
        return Err(Error::Config(format!("k = {k} outside 1..{d}")));
    }
    let e = nilpotent_exp(y)?;
    let raw = 4.0 * log_wedge_frobenius(&e, k) - 2.0 * log_wedge_frobenius(&e, k + 1) - 2.0 * log_wedge_frobenius(&e, k - 1);
    let at_zero = 2.0 * binomial(d, k).ln() - binomial(d, k + 1).ln() - binomial(d, k - 1).ln();
    Ok(raw - at_zero)
}

#[derive(Clone, Debug, Serialize)]
pub struct RationalSample {
    pub norm: f64,
    pub gap: f64,
    pub log_r: f64,
    /// `log(μ_k/μ_{k+1}) − ½ log R`.
    pub log_ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RationalProbeReport {
    pub k: usize,
    pub samples: Vec<RationalSample>,
    /// `log C` with `|log_ratio| ≤ log C`, frozen on the first half of the samples.
    pub log_c_fitted: f64,
    /// `log max(D_k, √(D_{k+1}D_{k−1}))`, `D_j = C(d, j)`.
    pub log_c_apriori: f64,
    /// Second-half samples outside the frozen constant.
    pub violations: usize,
    pub apriori_violations: usize,
    pub divergence: DivergenceVerdict,
    /// `log R ≥ δ log ‖Y‖ − β` over the divergent range.
    pub power_law: Option<FitResult>,
}

/// Samples `Y` in the span of a nilpotent basis with `‖Y‖_F` log-spaced in
/// `[1, max_norm]` and compares `μ_k/μ_{k+1}(e^Y)` with `√R(Y)`.
pub fn rational_growth_probe(basis: &[DMatrix<f64>], k: usize, samples: usize, max_norm: f64, seed: u64) -> Result<RationalProbeReport> {
    let Some(first) = basis.first() else {
        return Err(Error::Config("empty basis".into()));
    };
    let d = first.nrows();
    if samples < 4 || max_norm <= 1.0 {
        return Err(Error::Config("need at least 4 samples and max_norm > 1".into()));
    }
    for b in basis {
        if b.nrows() != d || b.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, got: b.nrows() });
        }
        for i in 0..d {
            for j in 0..=i {
                if b[(i, j)] != 0.0 {
                    return Err(Error::NotNilpotent(format!("basis element has entry ({i},{j}) on or below the diagonal")));
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(samples);
    for i in 0..samples {
        let norm = max_norm.powf(i as f64 / (samples - 1) as f64);
        let mut y = DMatrix::zeros(d, d);
        for b in basis {
            let c: f64 = rng.sample(StandardNormal);
            y += b * c;
        }
        let f = y.norm();
        if f == 0.0 {
            continue;
        }
        y *= norm / f;
        let gap = CartanStack::from_matrix(&nilpotent_exp(&y)?)?.mu_gap(k)?;
        let log_r = log_r_function(&y, k)?;
        out.push(RationalSample { norm, gap, log_r, log_ratio: gap - 0.5 * log_r });
    }
    let half = out.len() / 2;
    let log_c_fitted = out[..half].iter().map(|s| s.log_ratio.abs()).fold(0.0, f64::max);
    let violations = out[half..].iter().filter(|s| s.log_ratio.abs() > log_c_fitted + 1e-9).count();
    let dk = binomial(d, k);
    let log_c_apriori = dk.max((binomial(d, k + 1) * binomial(d, k - 1)).sqrt()).ln();
    let apriori_violations = out.iter().filter(|s| s.log_ratio.abs() > log_c_apriori + 1e-9).count();

    let (x, y): (Vec<f64>, Vec<f64>) = out.iter().map(|s| (s.norm.ln(), s.log_r)).unzip();
    let fit = fit_envelope(&x, &y, Direction::Lower, SlopeConstraint::NonNegative)?;
    let divergence = match fit.far_alpha {
        Some(a) if a >= super::dynamics::GROWTH_THRESHOLD => DivergenceVerdict::Unbounded,
        Some(_) if fit.is_flat(super::envelope::FLAT_SLOPE_TOL) => DivergenceVerdict::Bounded,
        _ => DivergenceVerdict::Inconclusive,
    };
    let power_law = (divergence == DivergenceVerdict::Unbounded).then_some(fit);
    Ok(RationalProbeReport {
        k,
        samples: out,
        log_c_fitted,
        log_c_apriori,
        violations,
        apriori_violations,
        divergence,
        power_law,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::builtin::{heisenberg_group, intro_family, pingpong_sym};

    fn e(d: usize, i: usize, j: usize) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(d, d);
        m[(i, j)] = 1.0;
        m
    }

    #[test]
    fn unipotent_verdicts() {
        let jordan = RatMatrix::from_integers(&[&[1, 5], &[0, 1]]);
        let hyperbolic = RatMatrix::from_integers(&[&[2, 1], &[1, 1]]);
        let conj = RatMatrix::from_integers(&[&[2, 1], &[-1, 0]]);
        let rot = RatMatrix::from_integers(&[&[0, -1], &[1, 0]]);
        let r = weakly_unipotent_check(&[jordan.clone(), rot], UNIPOTENT_TOL).unwrap();
        assert!(r.weakly_unipotent && r.routes_agree, "{r:?}");
        let r = weakly_unipotent_check(&[jordan, hyperbolic], UNIPOTENT_TOL).unwrap();
        assert!(!r.weakly_unipotent && r.routes_agree);
        let r = weakly_unipotent_check(&[conj], UNIPOTENT_TOL).unwrap();
        assert_eq!(r.entries[0].exact, Some(true), "{r:?}");
    }

    #[test]
    fn rational_diagonal_is_not_unipotent() {
        let m = RatMatrix::parse(&[vec!["2".into(), "0".into()], vec!["0".into(), "1/2".into()]]).unwrap();
        let r = weakly_unipotent_check(&[m], UNIPOTENT_TOL).unwrap();
        assert_eq!(r.entries[0].exact, None);
        assert!(!r.weakly_unipotent);
    }

    #[test]
    fn intro_peripheral_images_are_unipotent() {
        for t in [0, 1] {
            let (_, rep) = intro_family(t);
            let r = weakly_unipotent_check(&[rep.generator_images()[1].clone()], UNIPOTENT_TOL).unwrap();
            assert!(r.weakly_unipotent && r.routes_agree, "t = {t}");
        }
    }

    #[test]
    fn jordan_gap_matches_closed_form() {
        let ns: Vec<u64> = (1..=5).map(|e| 10u64.pow(e)).chain([1_000_000]).collect();
        for (n, gap, dev) in jordan_gap_check(&ns).unwrap() {
            // oracle: μ₁ = (N + √(N² + 4))/2, μ₂ = 1/μ₁
            let n = n as f64;
            let mu1 = 0.5 * (n + (n * n + 4.0).sqrt());
            assert!((gap - 2.0 * mu1.ln()).abs() < 1e-9);
            assert!(dev <= 1.0);
        }
    }

    #[test]
    fn heisenberg_growth_laws() {
        let g = heisenberg_group();
        let rep = Representation::identity(&g);
        let cfg = GrowthLawConfig { max_length: 2000, fit_length: 100, samples: 4, witness_max: 1024, seed: 3 };
        let r = unipotent_growth_laws(&g, &rep, 0, 1, &cfg).unwrap();
        assert_eq!(r.upper_violations, 0);
        assert!(r.checked > 0);
        match &r.lower {
            LowerLaw::NotApplicable { witness, gaps } => {
                assert_eq!(witness, "y^n x^n");
                assert!(gaps.iter().all(|&(_, gap)| gap < 2.0), "{gaps:?}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn anosov_peripheral_has_lower_law() {
        let (g, rep) = pingpong_sym(2);
        let cfg = GrowthLawConfig { max_length: 1000, fit_length: 50, samples: 2, witness_max: 256, seed: 1 };
        let r = unipotent_growth_laws(&g, &rep, 0, 1, &cfg).unwrap();
        assert_eq!(r.upper_violations, 0);
        match &r.lower {
            LowerLaw::Applicable { fit } => assert!(fit.alpha > 1.5 && fit.violations == 0, "{fit:?}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn non_unipotent_peripheral_is_rejected() {
        let (g, _) = pingpong_sym(2);
        let mut g2 = g.clone();
        g2.peripherals[0].generators = vec![0];
        let rep = Representation::identity(&g2);
        let err = unipotent_growth_laws(&g2, &rep, 0, 1, &GrowthLawConfig::default()).unwrap_err();
        assert!(matches!(err, Error::NotWeaklyUnipotent(_)));
    }

    #[test]
    fn r_at_zero_is_one() {
        for d in 2..=5 {
            for k in 1..d {
                assert!(log_r_function(&DMatrix::zeros(d, d), k).unwrap().abs() < 1e-12);
            }
        }
    }

    #[test]
    fn r_against_closed_form_in_dimension_two() {
        // Y = N E₁₂: ‖e^Y‖²_F = 2 + N², so R = (2 + N²)²/4.
        for n in [0.5, 3.0, 1e3] {
            let lr = log_r_function(&(e(2, 0, 1) * n), 1).unwrap();
            assert!((lr - 2.0 * ((2.0 + n * n) / 2.0).ln()).abs() < 1e-9);
        }
    }

    #[test]
    fn non_nilpotent_input_is_rejected() {
        let mut y = e(2, 0, 1);
        y[(1, 0)] = 1.0;
        assert!(matches!(nilpotent_exp(&y), Err(Error::NotNilpotent(_))));
        let err = rational_growth_probe(&[y], 1, 8, 10.0, 0).unwrap_err();
        assert!(matches!(err, Error::NotNilpotent(_)));
    }

    #[test]
    fn heisenberg_ray_diverges_but_curve_is_bounded() {
        // ray N(E₁₂ + E₂₃): μ₁/μ₂ grows like N²
        let ns = [1e1, 1e2, 1e3, 1e4];
        let ray: Vec<f64> = ns
            .iter()
            .map(|&n| CartanStack::from_matrix(&nilpotent_exp(&((e(3, 0, 1) + e(3, 1, 2)) * n)).unwrap()).unwrap().mu_gap(1).unwrap())
            .collect();
        assert!(ray[3] - ray[2] > 4.0 && ray[2] - ray[1] > 4.0, "{ray:?}");
        // yᴺxᴺ = exp(N E₁₂ + N E₂₃ − N²/2 E₁₃) stays bounded
        let curve: Vec<f64> = ns
            .iter()
            .map(|&n| {
                let y = (e(3, 0, 1) + e(3, 1, 2)) * n - e(3, 0, 2) * (n * n / 2.0);
                CartanStack::from_matrix(&nilpotent_exp(&y).unwrap()).unwrap().mu_gap(1).unwrap()
            })
            .collect();
        assert!(curve.iter().all(|&g| g < 1.5), "{curve:?}");
    }

    #[test]
    fn heisenberg_rational_probe() {
        let basis = [e(3, 0, 1), e(3, 1, 2), e(3, 0, 2)];
        let r = rational_growth_probe(&basis, 1, 24, 1e6, 7).unwrap();
        assert_eq!(r.apriori_violations, 0, "{:?}", r.samples);
        assert!(r.log_c_fitted <= r.log_c_apriori);
        assert_eq!(r.divergence, DivergenceVerdict::Unbounded);
        assert!(r.power_law.unwrap().alpha > 0.0);
    }
}
