//! End-to-end acceptance checks. Each test prints one PASS/FAIL line, written
//! straight to stderr so that it shows up without `--nocapture`.

use std::io::Write;
use std::time::Instant;

use num_complex::Complex64 as C64;

use son_core::hamiltonian::{
    aklt_projector_spectral, chain_hamiltonian, interaction_matrix, kernel_basis, parent_check, InteractionSpec,
    KernelOptions,
};
use son_core::linalg::{frobenius, hermitian_eigen, CMatrix, OperatorMatrix, RMatrix};
use son_core::mps::{
    rdm_eigen_by_grade, reduced_density_matrix, transfer_map, transfer_spectrum, two_point_correlation, Boundary,
    TransferVariant,
};
use son_core::report::Datum;
use son_core::repr::{
    binomial, defining_rep, exterior_power_rep, isotypic_decomposition, pieri_casimir_agrees, so_n_casimir,
    spin_matrices, tensor_rep,
};
use son_core::spt::{
    cocycle_sign, cpt_check, mixed_transfer, mps_spt_index, on_site_breaking_check, theta_det, CocycleRep, MpsTensor,
    OnSiteOptions, PairAction, TimeReversal,
};
use son_lab::campaign::{antisymmetric_observable, fit_slope, selftest};

struct Outcome {
    name: &'static str,
    limit: f64,
    start: Instant,
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Outcome {
    fn new(name: &'static str, limit_seconds: f64) -> Self {
        Self { name, limit: limit_seconds, start: Instant::now(), failures: Vec::new(), notes: Vec::new() }
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }

    fn note(&mut self, what: impl Into<String>) {
        self.notes.push(what.into());
    }

    fn finish(mut self) {
        let secs = self.start.elapsed().as_secs_f64();
        self.check(secs < self.limit, format!("runtime {secs:.2}s over {}s", self.limit));
        let status = if self.failures.is_empty() { "PASS" } else { "FAIL" };
        let mut line = format!("{status} {} ({secs:.2}s)", self.name);
        for f in &self.failures {
            line.push_str(&format!("\n    failed: {f}"));
        }
        for n in &self.notes {
            line.push_str(&format!("\n    {n}"));
        }
        let _ = writeln!(std::io::stderr(), "{line}");
        assert!(self.failures.is_empty(), "{}: {}", self.name, self.failures.join("; "));
    }
}

fn max_dev(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn real_value(r: &son_core::report::VerificationReport, key: &str) -> f64 {
    r.values.get(key).and_then(Datum::as_real).unwrap_or(f64::INFINITY)
}

#[test]
fn transfer_spectrum_grades() {
    let mut o = Outcome::new("transfer_spectrum_grades", 5.0);
    for n in 3..=8usize {
        let ev = transfer_map(n, TransferVariant::E, &CMatrix::identity(n, n)).unwrap().eigenvalues();
        let im = ev.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        let mut got: Vec<f64> = ev.iter().map(|z| z.re).collect();
        got.sort_by(f64::total_cmp);
        // grade k contributes (−1)^k (n−2k)/n, C(n,k) times; odd n keeps k < n/2
        let mut want = Vec::new();
        for k in (0..=n).filter(|&k| n % 2 == 0 || 2 * k < n) {
            let v = if k % 2 == 0 { 1.0 } else { -1.0 } * (n as f64 - 2.0 * k as f64) / n as f64;
            want.extend(std::iter::repeat_n(v, binomial(n, k)));
        }
        want.sort_by(f64::total_cmp);
        let dev = max_dev(&got, &want).max(im);
        o.check(dev < 1e-10, format!("n={n}: deviation {dev:.3e}"));
    }
    o.finish();
}

#[test]
fn aklt_identities() {
    let mut o = Outcome::new("aklt_identities", 1.0);
    // P^(2) from S_tot² = 0, 2, 6 on total spin 0, 1, 2
    let s = spin_matrices(2);
    let id = CMatrix::identity(3, 3);
    let mut stot2 = CMatrix::zeros(9, 9);
    for m in s.components() {
        let t = m.kronecker(&id) + id.kronecker(m);
        stot2 += &t * &t;
    }
    let p2 = &stot2 * (&stot2 - CMatrix::identity(9, 9) * C64::new(2.0, 0.0)) / C64::new(24.0, 0.0);
    let poly = interaction_matrix(&InteractionSpec::AkltSu2).unwrap().map(|x| C64::new(x, 0.0));
    let d_oracle = frobenius(&(&poly - &p2));
    let d_spectral = frobenius(&(&poly - aklt_projector_spectral().unwrap().map(|x| C64::new(x, 0.0))));
    o.check(d_oracle < 1e-12, format!("polynomial vs Casimir projector {d_oracle:.3e}"));
    o.check(d_spectral < 1e-12, format!("polynomial vs spectral projector {d_spectral:.3e}"));

    let want = [-1.0 / 3.0, -1.0 / 3.0, -1.0 / 3.0, 1.0];
    let lib = hermitian_eigen(&mixed_transfer(&MpsTensor::aklt_su2(), &RMatrix::identity(3, 3)).unwrap()).unwrap().values;
    o.check(max_dev(&lib, &want) < 1e-12, format!("library transfer spectrum {lib:?}"));
    // textbook tensors √(2/3)σ⁺, −√(1/3)σᶻ, −√(2/3)σ⁻
    let sp = RMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
    let sz = RMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
    let mats = [&sp * (2.0f64 / 3.0).sqrt(), &sz * -(1.0f64 / 3.0).sqrt(), sp.transpose() * -(2.0f64 / 3.0).sqrt()];
    let e: RMatrix = mats.iter().map(|a| a.kronecker(a)).fold(RMatrix::zeros(4, 4), |acc, x| acc + x);
    let mut ev: Vec<f64> = e.complex_eigenvalues().iter().map(|z| z.re).collect();
    ev.sort_by(f64::total_cmp);
    o.check(max_dev(&ev, &want) < 1e-12, format!("textbook transfer spectrum {ev:?}"));
    o.finish();
}

#[test]
fn n6_correlations() {
    let mut o = Outcome::new("n6_correlations", 5.0);
    let s = transfer_spectrum(6, TransferVariant::E).unwrap();
    o.check((s.subleading - 1.0 / 3.0).abs() < 1e-12, format!("subleading {}", s.subleading));
    let a = antisymmetric_observable(6);
    let rs: Vec<usize> = (2..=12).collect();
    let c: Vec<f64> = rs.iter().map(|&r| two_point_correlation(6, &a, &a, r, Boundary::Omega).unwrap().norm()).collect();
    let x: Vec<f64> = rs.iter().map(|&r| r as f64).collect();
    let y: Vec<f64> = c.iter().map(|v| v.ln()).collect();
    let slope = fit_slope(&x, &y);
    let want = -(3.0f64).ln();
    o.check(((slope - want) / want).abs() < 0.02, format!("slope {slope} vs {want}"));
    let ratio_dev = c.windows(2).map(|w| (w[0] / w[1] - 3.0).abs()).fold(0.0, f64::max);
    o.check(ratio_dev < 1e-9, format!("step ratio deviates from 3 by {ratio_dev:.3e}"));
    o.note(format!("slope {slope:.12}, max step-ratio deviation {ratio_dev:.3e}"));
    o.finish();
}

#[test]
fn parent_property() {
    let mut o = Outcome::new("parent_property", 180.0);
    let opts = KernelOptions::default();
    for (n, ls, dim) in [(3usize, 3..=6usize, 4i64), (4, 4..=6, 8), (5, 5..=6, 16)] {
        for l in ls {
            let r = parent_check(n, l, 2_000_000, &opts).unwrap();
            let k = r.values.get("kernel_dim").cloned();
            let dist = real_value(&r, "projector_distance");
            o.check(k == Some(Datum::Int(dim)), format!("n={n} l={l}: kernel {k:?}, want {dim}"));
            o.check(dist < 1e-8, format!("n={n} l={l}: projector distance {dist:.3e}"));
        }
    }
    o.finish();
}

#[test]
fn majumdar_ghosh_kernels() {
    let mut o = Outcome::new("majumdar_ghosh_kernels", 10.0);
    let opts = KernelOptions::default();
    for (l, want) in [(4usize, 5usize), (5, 4), (6, 5), (7, 4)] {
        let h = chain_hamiltonian(&InteractionSpec::MajumdarGhosh, l, 2_000_000).unwrap();
        let k = kernel_basis(&h, &opts).unwrap().dim;
        o.check(k == want, format!("l={l}: kernel {k}, want {want}"));
    }
    o.finish();
}

#[test]
fn marginal_relations() {
    let mut o = Outcome::new("marginal_relations", 30.0);
    let rho = |n, l, b| reduced_density_matrix(n, l, b, 4096).unwrap().matrix.mat;
    let d = frobenius(&(rho(6, 2, Boundary::OmegaPlus) - rho(6, 2, Boundary::OmegaMinus)));
    o.check(d < 1e-12, format!("n=6 l=2: ‖ρ⁺ − ρ⁻‖ = {d:.3e}"));
    let ov = (rho(4, 4, Boundary::OmegaPlus) * rho(4, 4, Boundary::OmegaMinus)).trace();
    o.check(ov.norm() < 1e-12, format!("n=4 l=4: Tr(ρ⁺ρ⁻) = {:.6e}", ov.re));
    o.note(format!("‖ρ₂⁺ − ρ₂⁻‖ = {d:.3e} at n=6, Tr(ρ₄⁺ρ₄⁻) = {:.6e} at n=4", ov.re));
    o.finish();
}

#[test]
fn n4_grade_eigenvalues() {
    let mut o = Outcome::new("n4_grade_eigenvalues", 60.0);
    let mut env = Vec::new();
    for l in 4..=12usize {
        let g = rdm_eigen_by_grade(4, l, Boundary::OmegaPlus).unwrap();
        env.push(g.iter().map(|x| (x.mu - 0.25).abs()).fold(0.0, f64::max));
    }
    let last = *env.last().unwrap();
    let monotone = env.windows(2).all(|w| w[1] <= w[0] + 1e-14);
    o.check(last < 1e-6, format!("envelope {last:.3e} at l=12"));
    o.check(monotone, "envelope increases");
    let shown: Vec<String> = env.iter().map(|e| format!("{e:.2e}")).collect();
    o.note(format!("envelope over l=4..12: [{}]", shown.join(", ")));
    o.finish();
}

#[test]
fn spt_indices() {
    let mut o = Outcome::new("spt_indices", 30.0);
    for n in 3..=8usize {
        let spin = cocycle_sign(n, &CocycleRep::Spin).unwrap();
        let def = cocycle_sign(n, &CocycleRep::Defining).unwrap();
        o.check(spin == -1 && def == 1, format!("n={n}: spin {spin}, defining {def}"));
    }
    for n in 3..=6usize {
        let s = mps_spt_index(&MpsTensor::so_n(n).unwrap()).unwrap().sign;
        o.check(s == -1, format!("Clifford tensor n={n}: {s}"));
        for t in [MpsTensor::product_axis(n).unwrap(), MpsTensor::product_dimer(n).unwrap()] {
            let s = mps_spt_index(&t).unwrap().sign;
            o.check(s == 1, format!("{} n={n}: {s}", t.name));
        }
    }
    let s = mps_spt_index(&MpsTensor::aklt_su2()).unwrap().sign;
    o.check(s == -1, format!("spin-1 AKLT: {s}"));
    o.finish();
}

#[test]
fn cpt_actions() {
    let mut o = Outcome::new("cpt_actions", 120.0);
    for (n, want) in [(4usize, PairAction::Fixes), (6, PairAction::Swaps)] {
        let r = cpt_check(n, n, 1e-9, 32_000_000).unwrap();
        o.check(r.conjugation == want, format!("n={n}: conjugation {:?}", r.conjugation));
        o.check(r.reflection == want, format!("n={n}: reflection {:?}", r.reflection));
        o.check(
            r.time_reversal == TimeReversal::Invariant,
            format!("n={n}: time reversal residual {:.3e}", r.residuals.time_reversal),
        );
        o.note(format!("n={n}: {:?}", r.residuals));
    }
    for n in 2..=8usize {
        let d = theta_det(n);
        o.check((d - 1.0).abs() < 1e-12, format!("det θ = {d} at n={n}"));
    }
    o.finish();
}

#[test]
fn on_site_breaking() {
    let mut o = Outcome::new("on_site_breaking", 30.0);
    let r = on_site_breaking_check(4, 4, &OnSiteOptions::default()).unwrap();
    let (rot, refl, spec) =
        (real_value(&r, "rotation_residual"), real_value(&r, "reflection_residual"), real_value(&r, "spectrum_residual"));
    o.check(rot < 1e-9, format!("20 rotations: residual {rot:.3e}"));
    o.check(refl < 1e-9, format!("reflection swap: residual {refl:.3e}"));
    o.check(spec < 1e-10, format!("spectra: residual {spec:.3e}"));
    o.check(r.passed(), r.detail.clone());
    o.finish();
}

#[test]
fn representation_dimensions() {
    let mut o = Outcome::new("representation_dimensions", 30.0);
    // V_μ ⊗ V_ν = ⊕ V_j over j = |μ−ν| .. μ+ν, read off the total-spin Casimir
    for two_mu in 0..=8u32 {
        for two_nu in 0..=8u32 {
            let (a, b) = (spin_matrices(two_mu), spin_matrices(two_nu));
            let (ia, ib) = (CMatrix::identity(a.dim, a.dim), CMatrix::identity(b.dim, b.dim));
            let mut cas = CMatrix::zeros(a.dim * b.dim, a.dim * b.dim);
            for (x, y) in a.components().iter().zip(b.components()) {
                let s = x.kronecker(&ib) + ia.kronecker(y);
                cas += &s * &s;
            }
            let got = isotypic_decomposition(&OperatorMatrix::new(cas)).unwrap().blocks;
            let want: Vec<(f64, usize)> = (two_mu.abs_diff(two_nu)..=two_mu + two_nu)
                .step_by(2)
                .map(|tj| (tj as f64 / 2.0 * (tj as f64 / 2.0 + 1.0), tj as usize + 1))
                .collect();
            let ok = got.len() == want.len() && got.iter().zip(&want).all(|(g, w)| g.1 == w.1 && (g.0 - w.0).abs() < 1e-8);
            o.check(ok, format!("2μ={two_mu} 2ν={two_nu}: {got:?}"));
        }
    }
    for (n, want) in [(3usize, vec![1usize, 3, 5]), (5, vec![1, 10, 14])] {
        let cas = so_n_casimir(n, tensor_rep(defining_rep(n), defining_rep(n))).unwrap();
        let mut dims = isotypic_decomposition(&cas).unwrap().dims();
        dims.sort();
        o.check(dims == want, format!("so({n}) V⊗V: {dims:?}"));
    }
    for n in 3..=6usize {
        for k in 1..n {
            let cas = so_n_casimir(n, tensor_rep(exterior_power_rep(n, k), defining_rep(n))).unwrap();
            let dims = isotypic_decomposition(&cas).unwrap().dims();
            let total: usize = dims.iter().sum();
            let rest = binomial(n, k) * n - binomial(n, k - 1) - binomial(n, k + 1);
            o.check(total == binomial(n, k) * n, format!("n={n} k={k}: total {total}"));
            o.check(rest > 0 && pieri_casimir_agrees(n, k).unwrap(), format!("n={n} k={k}: blocks {dims:?}"));
        }
    }
    o.finish();
}

#[test]
fn clifford_selftest() {
    let mut o = Outcome::new("clifford_selftest", 10.0);
    for n in 4..=8usize {
        let (p, t, anti) = selftest(n, 500, 7).unwrap();
        o.check(p < 1e-10 && t < 1e-10, format!("n={n}: products {p:.3e}, traces {t:.3e}"));
        o.check(anti < 1e-12, format!("n={n}: anticommutation {anti:.3e}"));
    }
    o.finish();
}
