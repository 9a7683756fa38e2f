//! Channel constructors: Fock-space lifts of two-mode linear optics, phase
//! shifts, pure loss, the quantum-limited amplifier and their thermal-noise
//! composition.
//!
//! Single-mode operators are `(truncation + 1)`-square. Two-mode operators
//! act on the joint index `n_a · (trunc_b + 1) + n_b`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{max_abs, CMatrix, DensityState, KrausSet};
use crate::special::{binomial, factorial};

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn check_unit_interval(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::InvalidParameter(format!("{name} must lie in [0, 1], got {v}")));
    }
    Ok(())
}

/// Power split of a beamsplitter. Amplitudes are `t = √T`, `r = √(1 − T)`
/// and the coupling angle satisfies `cos ζ = t`, `sin ζ = r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamsplitterParams {
    t_power: f64,
}

impl BeamsplitterParams {
    pub fn new(t_power: f64) -> Result<Self> {
        check_unit_interval("beamsplitter transmissivity", t_power)?;
        Ok(Self { t_power })
    }

    pub fn t_power(&self) -> f64 {
        self.t_power
    }

    pub fn r_power(&self) -> f64 {
        1.0 - self.t_power
    }

    pub fn t(&self) -> f64 {
        self.t_power.sqrt()
    }

    pub fn r(&self) -> f64 {
        self.r_power().sqrt()
    }

    pub fn coupling(&self) -> f64 {
        self.r().atan2(self.t())
    }

    /// Mode-transformation matrix `[[t, r], [−r, t]]`: row `i` gives the image
    /// of the `i`-th creation operator in terms of `(a†, b†)`.
    pub fn mode_matrix(&self) -> CMatrix {
        let (t, r) = (self.t(), self.r());
        CMatrix::from_row_slice(2, 2, &[c(t), c(r), c(-r), c(t)])
    }
}

/// A two-mode Fock-space operator built from a 2×2 mode transformation.
///
/// Photon-number blocks are exact for total photon number up to
/// `complete_up_to`; higher blocks are clipped by the truncation and are not
/// unitary.
#[derive(Debug, Clone)]
pub struct LinearOpticsUnitary {
    pub matrix: CMatrix,
    pub trunc_a: usize,
    pub trunc_b: usize,
    pub complete_up_to: usize,
}

impl LinearOpticsUnitary {
    fn index(&self, na: usize, nb: usize) -> usize {
        na * (self.trunc_b + 1) + nb
    }

    /// Basis states `|N − m, m⟩` of the `N`-photon block that fit the
    /// truncation, ordered by `m`.
    fn block_states(&self, total: usize) -> Vec<usize> {
        (0..=total)
            .filter(|&m| m <= self.trunc_b && total - m <= self.trunc_a)
            .map(|m| self.index(total - m, m))
            .collect()
    }

    /// The `N`-photon block, indexed by the photon count in the second mode.
    pub fn block(&self, total: usize) -> CMatrix {
        let idx = self.block_states(total);
        CMatrix::from_fn(idx.len(), idx.len(), |i, j| self.matrix[(idx[i], idx[j])])
    }

    pub fn is_complete(&self, total: usize) -> bool {
        total <= self.complete_up_to
    }

    /// `max |B†B − I|` over the `N`-photon block.
    pub fn block_unitarity_error(&self, total: usize) -> f64 {
        let b = self.block(total);
        let n = b.nrows();
        max_abs(&(b.adjoint() * &b - CMatrix::identity(n, n)))
    }
}

/// Beamsplitter of power transmissivity `T` in its Fock representation.
///
/// With `|N − n, n⟩ → Σ_m U_{m,n} |N − m, m⟩`, the element is
/// `√((N−n)! n!) / √((N−m)! m!) · t^{N−2n} (r/t)^{m−n} P_n^{(m−n, N−n−m)}(t² − r²)`.
/// The Jacobi polynomial is expanded as a finite sum and the powers of `t`
/// and `r` are merged termwise, which keeps `T = 0` and `T = 1` exact.
pub fn beamsplitter_unitary(t_power: f64, trunc_a: usize, trunc_b: usize) -> Result<LinearOpticsUnitary> {
    let bs = BeamsplitterParams::new(t_power)?;
    let (t, r) = (bs.t(), bs.r());
    let mut out = empty_two_mode(trunc_a, trunc_b)?;
    for total in 0..=(trunc_a + trunc_b) {
        let counts: Vec<usize> = (0..=total).filter(|&m| m <= trunc_b && total - m <= trunc_a).collect();
        for &n in &counts {
            for &m in &counts {
                let weight = (factorial(total - n) * factorial(n) / (factorial(total - m) * factorial(m))).sqrt();
                let sum: f64 = (0..=n.min(total - m))
                    .filter(|&s| n - s <= m)
                    .map(|s| {
                        let sign = if s % 2 == 0 { 1.0 } else { -1.0 };
                        sign * binomial(m, n - s)
                            * binomial(total - m, s)
                            * r.powi((m + 2 * s - n) as i32)
                            * t.powi((total + n - m - 2 * s) as i32)
                    })
                    .sum();
                let (row, col) = (out.index(total - m, m), out.index(total - n, n));
                out.matrix[(row, col)] = c(weight * sum);
            }
        }
    }
    Ok(out)
}

fn empty_two_mode(trunc_a: usize, trunc_b: usize) -> Result<LinearOpticsUnitary> {
    if trunc_a < 1 || trunc_b < 1 {
        return Err(Error::InvalidParameter("truncations must be at least 1".into()));
    }
    let dim = (trunc_a + 1) * (trunc_b + 1);
    Ok(LinearOpticsUnitary {
        matrix: CMatrix::zeros(dim, dim),
        trunc_a,
        trunc_b,
        complete_up_to: trunc_a.min(trunc_b),
    })
}

/// Fock lift of a 2×2 unitary mode transformation `u`, with
/// `a† → u₁₁ a† + u₁₂ b†` and `b† → u₂₁ a† + u₂₂ b†`.
///
/// Built by direct binomial expansion of
/// `(u₁₁ a† + u₁₂ b†)^p (u₂₁ a† + u₂₂ b†)^q |0,0⟩ / √(p! q!)`.
pub fn lift_two_mode_linear(u: &CMatrix, trunc_a: usize, trunc_b: usize) -> Result<LinearOpticsUnitary> {
    if u.shape() != (2, 2) {
        return Err(Error::ShapeMismatch {
            rows: u.nrows(),
            cols: u.ncols(),
            expected: 2,
        });
    }
    let dev = max_abs(&(u.adjoint() * u - CMatrix::identity(2, 2)));
    if dev > 1e-10 {
        return Err(Error::NotUnitary(dev));
    }
    let mut out = empty_two_mode(trunc_a, trunc_b)?;
    let (u11, u12, u21, u22) = (u[(0, 0)], u[(0, 1)], u[(1, 0)], u[(1, 1)]);
    for p in 0..=trunc_a {
        for q in 0..=trunc_b {
            let col = out.index(p, q);
            let norm = (factorial(p) * factorial(q)).sqrt();
            for i in 0..=p {
                let left = u11.powu(i as u32) * u12.powu((p - i) as u32) * binomial(p, i);
                for j in 0..=q {
                    let right = u21.powu(j as u32) * u22.powu((q - j) as u32) * binomial(q, j);
                    let na = i + j;
                    let nb = p + q - na;
                    if na > trunc_a || nb > trunc_b {
                        continue;
                    }
                    let amp = left * right * ((factorial(na) * factorial(nb)).sqrt() / norm);
                    let row = out.index(na, nb);
                    out.matrix[(row, col)] += amp;
                }
            }
        }
    }
    Ok(out)
}

/// Polarization mode selector: a beamsplitter-like reflection
/// `[[cos 2θ, sin 2θ], [sin 2θ, −cos 2θ]]` acting on (H, V).
pub fn mode_selector(theta: f64) -> CMatrix {
    let (s, co) = (2.0 * theta).sin_cos();
    CMatrix::from_row_slice(2, 2, &[c(co), c(s), c(s), c(-co)])
}

/// Single-mode phase shift `diag(e^{i n φ})`.
pub fn phase_shift(phi: f64, trunc: usize) -> CMatrix {
    let diag = nalgebra::DVector::from_fn(trunc + 1, |n, _| Complex64::from_polar(1.0, n as f64 * phi));
    CMatrix::from_diagonal(&diag)
}

/// `√(n!/(n−l)!)`, the matrix element `⟨n−l| a^l |n⟩`.
fn lowering_weight(n: usize, l: usize) -> f64 {
    (factorial(n) / factorial(n - l)).sqrt()
}

/// Pure-loss Kraus operators `p_l τ^{n̂/2} a^l` with `p_l = √((1−τ)^l / l!)`,
/// `l = 0..=trunc`. Operators that vanish identically are omitted.
pub fn loss_kraus(tau: f64, trunc: usize) -> Result<Vec<CMatrix>> {
    check_unit_interval("loss transmissivity", tau)?;
    let dim = trunc + 1;
    let mut ops = Vec::with_capacity(dim);
    for l in 0..dim {
        let p = ((1.0 - tau).powi(l as i32) / factorial(l)).sqrt();
        if p == 0.0 {
            continue;
        }
        let mut k = CMatrix::zeros(dim, dim);
        for n in l..dim {
            let out = n - l;
            k[(out, n)] = c(p * tau.powf(out as f64 / 2.0) * lowering_weight(n, l));
        }
        ops.push(k);
    }
    Ok(ops)
}

/// Kraus operators of a beamsplitter of transmissivity `T` with a vacuum
/// ancilla that is traced out: `(r^l / √l!) t^{n̂} a^l`.
pub fn attenuator_kraus_single_mode(t_power: f64, trunc: usize) -> Result<Vec<CMatrix>> {
    let bs = BeamsplitterParams::new(t_power)?;
    let (t, r) = (bs.t(), bs.r());
    let dim = trunc + 1;
    let mut ops = Vec::with_capacity(dim);
    for l in 0..dim {
        let w = r.powi(l as i32) / factorial(l).sqrt();
        if w == 0.0 {
            continue;
        }
        let mut k = CMatrix::zeros(dim, dim);
        for n in l..dim {
            k[(n - l, n)] = c(w * t.powi((n - l) as i32) * lowering_weight(n, l));
        }
        ops.push(k);
    }
    Ok(ops)
}

fn check_gain(gain: f64) -> Result<()> {
    if !(gain >= 1.0) || !gain.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "amplifier gain must be ≥ 1, got {gain}"
        )));
    }
    Ok(())
}

/// Quantum-limited amplifier Kraus operators `q_k a†^k G^{−n̂/2}` with
/// `q_k² = (1/k!) (1/G) ((G−1)/G)^k`, `k = 0..=trunc`.
///
/// Within the truncation the channel loses the probability that would be
/// pushed above `trunc`; see [`amplifier_trace_deficit`].
pub fn amplifier_kraus(gain: f64, trunc: usize) -> Result<Vec<CMatrix>> {
    check_gain(gain)?;
    let x = (gain - 1.0) / gain;
    let dim = trunc + 1;
    let mut ops = Vec::with_capacity(dim);
    for k in 0..dim {
        let q = (x.powi(k as i32) / (factorial(k) * gain)).sqrt();
        if q == 0.0 {
            continue;
        }
        let mut b = CMatrix::zeros(dim, dim);
        for n in 0..dim - k {
            // a†^k |n⟩ = √((n+k)!/n!) |n+k⟩
            let raise = (factorial(n + k) / factorial(n)).sqrt();
            b[(n + k, n)] = c(q * gain.powf(-(n as f64) / 2.0) * raise);
        }
        ops.push(b);
    }
    Ok(ops)
}

/// Trace lost by [`amplifier_kraus`] on input `|n⟩⟨n|`:
/// `Σ_{k > trunc − n} C(n+k, k) x^k / G^{n+1}` with `x = (G−1)/G`.
pub fn amplifier_trace_deficit(gain: f64, trunc: usize, n: usize) -> Result<f64> {
    check_gain(gain)?;
    if n > trunc {
        return Ok(1.0);
    }
    let x = (gain - 1.0) / gain;
    if x == 0.0 {
        return Ok(0.0);
    }
    let mut sum = 0.0;
    let mut k = trunc - n + 1;
    loop {
        let term = binomial(n + k, k) * x.powi(k as i32) / gain.powi(n as i32 + 1);
        sum += term;
        if term <= 1e-17 * sum || k > 100_000 {
            break;
        }
        k += 1;
    }
    Ok(sum)
}

/// Thermal-noise channel parameters: beamsplitter transmissivity `κ` and
/// mean thermal photon number `n̄_B`. Decomposes into pure loss of
/// transmissivity `τ = κ/G` followed by an amplifier of gain
/// `G = 1 + (1 − κ) n̄_B`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseChannelParams {
    pub kappa: f64,
    pub n_bar_b: f64,
}

impl NoiseChannelParams {
    pub fn new(kappa: f64, n_bar_b: f64) -> Result<Self> {
        check_unit_interval("noise-channel transmissivity", kappa)?;
        if !(n_bar_b >= 0.0) || !n_bar_b.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "thermal photon number must be ≥ 0, got {n_bar_b}"
            )));
        }
        Ok(Self { kappa, n_bar_b })
    }

    pub fn identity() -> Self {
        Self {
            kappa: 1.0,
            n_bar_b: 0.0,
        }
    }

    pub fn gain(&self) -> f64 {
        1.0 + (1.0 - self.kappa) * self.n_bar_b
    }

    pub fn tau(&self) -> f64 {
        self.kappa / self.gain()
    }

    pub fn is_identity(&self) -> bool {
        self.kappa == 1.0 && self.n_bar_b == 0.0
    }
}

/// Loss-then-gain thermal noise channel on one mode.
#[derive(Debug, Clone)]
pub struct ThermalNoiseChannel {
    pub params: NoiseChannelParams,
    pub loss: Vec<CMatrix>,
    pub gain: Vec<CMatrix>,
}

pub fn thermal_noise_channel(kappa: f64, n_bar_b: f64, trunc: usize) -> Result<ThermalNoiseChannel> {
    let params = NoiseChannelParams::new(kappa, n_bar_b)?;
    Ok(ThermalNoiseChannel {
        params,
        loss: loss_kraus(params.tau(), trunc)?,
        gain: amplifier_kraus(params.gain(), trunc)?,
    })
}

impl ThermalNoiseChannel {
    /// Applies loss, then gain, to the named mode.
    pub fn apply(&self, state: &DensityState, uuid: &str) -> Result<DensityState> {
        if self.params.is_identity() {
            return Ok(state.clone());
        }
        let lossy = state.apply_kraus(&KrausSet::new(self.loss.clone(), [uuid])?)?;
        lossy.apply_kraus(&KrausSet::new(self.gain.clone(), [uuid])?)
    }

    /// The single Kraus list `{B_k A_l}`.
    pub fn composed(&self) -> Vec<CMatrix> {
        self.gain
            .iter()
            .flat_map(|b| self.loss.iter().map(move |a| b * a))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{Count, ModeDescriptor};
    use crate::special::jacobi;
    use approx::assert_relative_eq;

    fn mode(uuid: &str, trunc: usize) -> ModeDescriptor {
        ModeDescriptor::bare(uuid, trunc).unwrap()
    }

    fn amp(u: &LinearOpticsUnitary, out: (usize, usize), inp: (usize, usize)) -> Complex64 {
        u.matrix[(u.index(out.0, out.1), u.index(inp.0, inp.1))]
    }

    #[test]
    fn params() {
        let bs = BeamsplitterParams::new(0.25).unwrap();
        assert_eq!(bs.t_power() + bs.r_power(), 1.0);
        assert_relative_eq!(bs.coupling().cos(), bs.t(), epsilon = 1e-15);
        assert!(BeamsplitterParams::new(1.2).is_err());
        assert!(beamsplitter_unitary(-0.1, 2, 2).is_err());
    }

    #[test]
    fn unit_transmission_is_identity() {
        let u = beamsplitter_unitary(1.0, 3, 4).unwrap();
        assert!(max_abs(&(u.matrix.clone() - CMatrix::identity(20, 20))) < 1e-15);
    }

    #[test]
    fn balanced_split_of_single_photon() {
        let u = beamsplitter_unitary(0.5, 2, 2).unwrap();
        let h = 0.5f64.sqrt();
        assert_relative_eq!(amp(&u, (1, 0), (1, 0)).re, h, epsilon = 1e-15);
        assert_relative_eq!(amp(&u, (0, 1), (1, 0)).re, h, epsilon = 1e-15);
    }

    #[test]
    fn hong_ou_mandel() {
        // (t a† + r b†)(−r a† + t b†)|0,0⟩ at t = r = 1/√2: (|0,2⟩ − |2,0⟩)/√2
        let u = beamsplitter_unitary(0.5, 2, 2).unwrap();
        let h = 0.5f64.sqrt();
        assert!(amp(&u, (1, 1), (1, 1)).norm() < 1e-15);
        assert_relative_eq!(amp(&u, (2, 0), (1, 1)).re, -h, epsilon = 1e-15);
        assert_relative_eq!(amp(&u, (0, 2), (1, 1)).re, h, epsilon = 1e-15);
    }

    #[test]
    fn matches_jacobi_form() {
        let (tp, ta, tb) = (0.3, 4, 4);
        let u = beamsplitter_unitary(tp, ta, tb).unwrap();
        let (t, r) = (tp.sqrt(), (1.0 - tp).sqrt());
        for total in 0..=4usize {
            for n in 0..=total {
                for m in 0..=total {
                    let pref = (factorial(total - n) * factorial(n) / (factorial(total - m) * factorial(m))).sqrt();
                    let jac = jacobi(
                        n,
                        m as i64 - n as i64,
                        total as i64 - n as i64 - m as i64,
                        t * t - r * r,
                    );
                    let expected = pref * t.powi(total as i32 - 2 * n as i32) * (r / t).powi(m as i32 - n as i32) * jac;
                    let got = amp(&u, (total - m, m), (total - n, n)).re;
                    assert_relative_eq!(got, expected, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn zero_transmission_swaps_with_sign() {
        let u = beamsplitter_unitary(0.0, 3, 3).unwrap();
        for total in 0..=3 {
            for n in 0..=total {
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                assert_relative_eq!(amp(&u, (n, total - n), (total - n, n)).re, sign, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn blocks_unitary_and_flagged() {
        let u = beamsplitter_unitary(0.37, 3, 5).unwrap();
        assert_eq!(u.complete_up_to, 3);
        for total in 0..=3 {
            assert!(u.block_unitarity_error(total) < 1e-12);
        }
        assert!(!u.is_complete(4));
        assert!(u.block_unitarity_error(5) > 1e-3);
    }

    #[test]
    fn lift_matches_beamsplitter() {
        for tp in [0.0, 0.2, 0.5, 0.9, 1.0] {
            let bs = BeamsplitterParams::new(tp).unwrap();
            let lifted = lift_two_mode_linear(&bs.mode_matrix(), 4, 3).unwrap();
            let direct = beamsplitter_unitary(tp, 4, 3).unwrap();
            assert!(max_abs(&(lifted.matrix - direct.matrix)) < 1e-12);
        }
    }

    #[test]
    fn lift_rejects_non_unitary() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0), c(1.0), c(0.0), c(1.0)]);
        assert!(matches!(lift_two_mode_linear(&m, 2, 2), Err(Error::NotUnitary(_))));
        let id = lift_two_mode_linear(&CMatrix::identity(2, 2), 2, 3).unwrap();
        assert!(max_abs(&(id.matrix - CMatrix::identity(12, 12))) < 1e-15);
    }

    #[test]
    fn mode_selector_preparations() {
        let h = 0.5f64.sqrt();
        let cases = [
            (std::f64::consts::FRAC_PI_2, (1.0, 0.0)),
            (3.0 * std::f64::consts::FRAC_PI_4, (0.0, 1.0)),
            (3.0 * std::f64::consts::PI / 8.0, (-h, h)),
            (5.0 * std::f64::consts::PI / 8.0, (h, h)),
        ];
        for (theta, (ah, av)) in cases {
            let u = lift_two_mode_linear(&mode_selector(theta), 1, 1).unwrap();
            let out_h = amp(&u, (1, 0), (1, 0));
            let out_v = amp(&u, (0, 1), (1, 0));
            // equal up to a global sign
            let sign = if (out_h.re - ah).abs() < 1e-12 && (out_v.re - av).abs() < 1e-12 {
                1.0
            } else {
                -1.0
            };
            assert_relative_eq!(out_h.re, sign * ah, epsilon = 1e-12);
            assert_relative_eq!(out_v.re, sign * av, epsilon = 1e-12);
        }
    }

    #[test]
    fn phase_shift_diagonal() {
        let p = phase_shift(std::f64::consts::PI, 2);
        assert_relative_eq!(p[(1, 1)].re, -1.0, epsilon = 1e-15);
        assert!(max_abs(&(phase_shift(0.0, 3) - CMatrix::identity(4, 4))) == 0.0);
    }

    #[test]
    fn loss_forms_agree() {
        for tau in [0.0, 0.13, 0.5, 0.87, 1.0] {
            let a = loss_kraus(tau, 6).unwrap();
            let w = attenuator_kraus_single_mode(tau, 6).unwrap();
            assert_eq!(a.len(), w.len());
            for (x, y) in a.iter().zip(&w) {
                assert!(max_abs(&(x - y)) < 1e-14);
            }
        }
        assert_eq!(loss_kraus(1.0, 4).unwrap().len(), 1);
        assert!(loss_kraus(1.5, 4).is_err());
    }

    #[test]
    fn loss_is_trace_preserving() {
        let ks = KrausSet::new(loss_kraus(0.42, 7).unwrap(), ["a"]).unwrap();
        let comp = ks.completeness().unwrap();
        assert!(max_abs(&(comp - CMatrix::identity(8, 8))) < 1e-14);
    }

    #[test]
    fn amplifier_on_vacuum() {
        let gain = 1.5;
        let ks = KrausSet::new(amplifier_kraus(gain, 10).unwrap(), ["a"]).unwrap();
        let out = DensityState::vacuum(vec![mode("a", 10)])
            .unwrap()
            .apply_kraus(&ks)
            .unwrap();
        let x = (gain - 1.0) / gain;
        for k in 0..=10 {
            assert_relative_eq!(out.matrix()[(k, k)].re, x.powi(k as i32) / gain, epsilon = 1e-15);
        }
    }

    #[test]
    fn amplifier_deficit_matches_analytic() {
        let gain = 1.3;
        let trunc = 8;
        let ks = KrausSet::new(amplifier_kraus(gain, trunc).unwrap(), ["a"]).unwrap();
        for n in 0..=trunc {
            let out = DensityState::fock(n, mode("a", trunc))
                .unwrap()
                .apply_kraus(&ks)
                .unwrap();
            let deficit = amplifier_trace_deficit(gain, trunc, n).unwrap();
            assert_relative_eq!(1.0 - out.trace(), deficit, epsilon = 1e-13);
        }
        assert!(ks.max_completeness_eigenvalue() <= 1.0 + 1e-12);
        assert_eq!(amplifier_kraus(1.0, 5).unwrap().len(), 1);
        assert!(amplifier_kraus(0.9, 5).is_err());
    }

    #[test]
    fn thermal_noise_limits() {
        let s = DensityState::fock(1, mode("a", 4)).unwrap();
        let id = thermal_noise_channel(1.0, 0.0, 4).unwrap();
        assert_eq!(id.apply(&s, "a").unwrap(), s);

        let ch = thermal_noise_channel(0.6, 0.0, 4).unwrap();
        let out = ch.apply(&s, "a").unwrap();
        assert_relative_eq!(
            out.outcome_probability(&[("a", Count::AtLeast(1))]).unwrap(),
            0.6,
            epsilon = 1e-15
        );

        let p = NoiseChannelParams::new(0.25, 7e-5 / 0.75).unwrap();
        assert_relative_eq!(p.tau() * p.gain(), 0.25, epsilon = 1e-15);
        assert!(p.gain() >= 1.0);
    }

    #[test]
    fn composed_matches_two_stage() {
        let s = DensityState::coherent(Complex64::new(0.6, 0.2), mode("a", 6)).unwrap();
        let ch = thermal_noise_channel(0.7, 0.3, 6).unwrap();
        let staged = ch.apply(&s, "a").unwrap();
        let composed = s.apply_kraus(&KrausSet::new(ch.composed(), ["a"]).unwrap()).unwrap();
        assert!(max_abs(&(staged.matrix() - composed.matrix())) < 1e-14);
    }
}
