//! Campaigns: named groups of checks over an `(n, ℓ)` grid.

use std::collections::BTreeMap;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use son_core::clifford::{CliffordElement, GammaIndex};
use son_core::hamiltonian::{
    aklt_projector_spectral, chain_hamiltonian, frustration_free_check, interaction_matrix, kernel_basis,
    parent_check, InteractionSpec, KernelOptions,
};
use son_core::linalg::{frobenius, frobenius_real, hermitian_eigen, CMatrix, OperatorMatrix, RMatrix};
use son_core::mps::{
    rdm_eigen_by_grade, rdm_factor, rdm_overlap, reduced_density_matrix, transfer_map, transfer_spectrum,
    two_point_correlation, Boundary, TransferVariant,
};
use son_core::realize::{matrix_rep, realize};
use son_core::report::{Datum, VerificationReport};
use son_core::repr::{
    binomial, clebsch_gordan_dims, defining_rep, isotypic_decomposition, pieri_casimir_agrees, pieri_predicted_blocks,
    so_n_casimir, spin_matrices, tensor_rep,
};
use son_core::spt::{
    cocycle_sign, cpt_check, factored_distance, mixed_transfer, mps_spt_index, on_site_breaking_check,
    theta_det, theta_spin_flip_residual, CocycleRep, MpsTensor, OnSiteOptions, PmFactors,
};
use son_core::Error;

use crate::config::{Campaign, CampaignConfig, Caps, Tolerances};
use crate::document::{Cell, CheckRecord, ReportDocument, Table};

/// Residual bound for the CPT and on-site symmetry checks.
pub const SYMMETRY_TOL: f64 = 1e-9;
/// Random products per rank in the Clifford self-test.
pub const SELFTEST_SAMPLES: usize = 500;
/// Largest `n^ℓ` for the dense eigenvalue cross-check of `ρ`.
pub const DENSE_SPECTRUM_DIM: usize = 729;
/// Envelope bound the eigenvalue convergence check runs down to.
pub const ENVELOPE_TARGET: f64 = 1e-6;
/// Longest chain the convergence check tries past `ℓ = n`.
pub const ENVELOPE_MAX_EXTRA: usize = 80;
/// Default parent-property lengths stay below this chain dimension.
pub const PARENT_DEFAULT_DIM: usize = 50_000;

type CoreResult<T> = son_core::Result<T>;

fn table_columns(name: &str) -> &'static [&'static str] {
    match name {
        "transfer_eigenvalues" => &["n", "variant", "eigenvalue", "multiplicity"],
        "mu" => &["n", "l", "boundary", "grade", "mu", "multiplicity"],
        "mu_envelope" => &["n", "l", "envelope"],
        "correlators" => &["n", "r", "value"],
        _ => &[],
    }
}

#[derive(Default)]
pub struct Tables(BTreeMap<String, Table>);

impl Tables {
    pub fn row(&mut self, name: &str, row: Vec<Cell>) {
        self.0
            .entry(name.to_string())
            .or_insert_with(|| Table::new(name, table_columns(name)))
            .push(row);
    }
}

struct Runner<'a> {
    cfg: &'a CampaignConfig,
    entries: Vec<(CheckRecord, f64)>,
    tables: Tables,
}

impl Runner<'_> {
    fn run<F>(&mut self, campaign: Campaign, check: &str, claim: &str, n: Option<usize>, l: Option<usize>, f: F)
    where
        F: FnOnce(&mut Tables) -> CoreResult<VerificationReport>,
    {
        let start = Instant::now();
        let base = || {
            let mut r = VerificationReport::new(check, claim);
            r.n = n;
            r.l = l;
            r
        };
        let report = match f(&mut self.tables) {
            Ok(mut r) => {
                r.check = check.to_string();
                r.n = n.or(r.n);
                r.l = l.or(r.l);
                r
            }
            Err(Error::CapExceeded { what, size, cap }) => {
                let mut r = base().skipped("cap-exceeded");
                r.value("limit", Datum::text(what));
                r.value("size", Datum::int(size));
                r.value("cap", Datum::int(cap));
                r
            }
            Err(e) => {
                let mut r = base();
                r.verdict(false, format!("error: {e}"));
                r
            }
        };
        let record = CheckRecord { campaign: campaign.name().to_string(), report };
        self.entries.push((record, start.elapsed().as_secs_f64()));
    }

    fn lengths(&self, default: impl Fn() -> Vec<usize>) -> Vec<usize> {
        self.cfg.l_list.clone().unwrap_or_else(default)
    }
}

/// Runs every check of `cfg.campaign` and assembles the report.
pub fn run_campaign(cfg: &CampaignConfig) -> ReportDocument {
    let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let start = Instant::now();
    let mut runner = Runner { cfg, entries: Vec::new(), tables: Tables::default() };
    let (tol, caps) = (cfg.tolerances, cfg.caps);
    if !cfg.n_list.is_empty() {
        for campaign in cfg.campaign.expand() {
            match campaign {
                Campaign::Transfer => transfer_campaign(&mut runner, tol),
                Campaign::Rdm => rdm_campaign(&mut runner, tol, caps),
                Campaign::Parent => parent_campaign(&mut runner, tol, caps),
                Campaign::Spt => spt_campaign(&mut runner),
                Campaign::Cpt => cpt_campaign(&mut runner, caps),
                Campaign::CliffordSelftest => selftest_campaign(&mut runner, tol),
                Campaign::ReprDims => repr_campaign(&mut runner),
                Campaign::All => unreachable!("expanded above"),
            }
        }
    }
    let mut entries = runner.entries;
    entries.sort_by(|(a, _), (b, _)| {
        (&a.campaign, a.report.n, a.report.l, &a.report.check).cmp(&(&b.campaign, b.report.n, b.report.l, &b.report.check))
    });
    let mut doc = ReportDocument::new(cfg.clone());
    doc.timing.timestamp = timestamp;
    doc.timing.check_seconds = entries.iter().map(|e| e.1).collect();
    doc.checks = entries.into_iter().map(|e| e.0).collect();
    doc.tables = runner.tables.0.into_values().collect();
    doc.tally();
    doc.timing.total_seconds = start.elapsed().as_secs_f64();
    doc
}

fn boundary_name(b: Boundary) -> &'static str {
    match b {
        Boundary::Omega => "omega",
        Boundary::OmegaPlus => "omega_plus",
        Boundary::OmegaMinus => "omega_minus",
    }
}

fn boundaries(n: usize) -> Vec<Boundary> {
    if n % 2 == 1 {
        vec![Boundary::Omega]
    } else {
        vec![Boundary::OmegaPlus, Boundary::OmegaMinus]
    }
}

fn pow(n: usize, l: usize) -> usize {
    (0..l).fold(1usize, |a, _| a.saturating_mul(n))
}

// ---------------------------------------------------------------------------
// transfer

/// `(−1)^k(n−2k)/n` with multiplicity `C(n,k)`; grades below `n/2` at odd n.
pub fn predicted_transfer_eigenvalues(n: usize) -> Vec<f64> {
    let mut out = Vec::new();
    for k in 0..=n {
        if n % 2 == 1 && 2 * k > n {
            continue;
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let v = sign * (n as f64 - 2.0 * k as f64) / n as f64;
        out.extend(std::iter::repeat_n(v, binomial(n, k)));
    }
    out.sort_by(f64::total_cmp);
    out
}

/// Decay rate of correlations of antisymmetric observables.
pub fn predicted_subleading(n: usize) -> f64 {
    if n % 2 == 1 {
        (n as f64 - 2.0) / n as f64
    } else {
        (n as f64 - 4.0) / n as f64
    }
}

/// Antisymmetric observable `i(|1⟩⟨2| − |2⟩⟨1|)`.
pub fn antisymmetric_observable(n: usize) -> CMatrix {
    let mut a = CMatrix::zeros(n, n);
    a[(0, 1)] = C64::new(0.0, 1.0);
    a[(1, 0)] = C64::new(0.0, -1.0);
    a
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let m = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / m, y.iter().sum::<f64>() / m);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn transfer_campaign(r: &mut Runner, tol: Tolerances) {
    let c = Campaign::Transfer;
    r.run(c, "aklt_identities", "AKLT projector polynomial and transfer spectrum {1, −1/3 ×3}", None, None, |_| {
        aklt_identities(tol)
    });
    for n in r.cfg.n_list.clone() {
        r.run(c, "transfer_spectrum", "E eigenvalues are (−1)^k(n−2k)/n with multiplicity C(n,k)", Some(n), None, |t| {
            transfer_spectrum_check(n, tol, t)
        });
        r.run(c, "correlation_length", "subleading modulus of the correlation sector", Some(n), None, |_| {
            correlation_length_check(n)
        });
        r.run(c, "two_point_decay", "log|C(r)| decays with slope log|(n−4)/n| over r = 2..12", Some(n), None, |t| {
            two_point_decay_check(n, t)
        });
    }
}

fn aklt_identities(tol: Tolerances) -> CoreResult<VerificationReport> {
    let mut rep = VerificationReport::new("aklt_identities", "").tol(1e-12).input("tol_match", Datum::real(tol.matching));
    let poly = interaction_matrix(&InteractionSpec::AkltSu2)?;
    let diff = frobenius_real(&(poly - aklt_projector_spectral()?));
    let t = MpsTensor::aklt_su2();
    let m = mixed_transfer(&t, &RMatrix::identity(3, 3))?;
    let ev = hermitian_eigen(&m)?.values;
    let want = [-1.0 / 3.0, -1.0 / 3.0, -1.0 / 3.0, 1.0];
    let spec = ev.iter().zip(want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    rep.value("projector_residual", Datum::real(diff));
    rep.value("transfer_eigenvalues", Datum::Reals(ev));
    rep.value("transfer_residual", Datum::real(spec));
    let ok = diff < 1e-12 && spec < 1e-12;
    rep.verdict(ok, format!("polynomial residual {diff:.3e}, spectrum residual {spec:.3e}"));
    Ok(rep)
}

fn transfer_spectrum_check(n: usize, tol: Tolerances, tables: &mut Tables) -> CoreResult<VerificationReport> {
    let mut rep = VerificationReport::new("", "").tol(tol.matching);
    let tm = transfer_map(n, TransferVariant::E, &CMatrix::identity(n, n))?;
    let ev = tm.eigenvalues();
    let max_im = ev.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let mut got: Vec<f64> = ev.iter().map(|z| z.re).collect();
    got.sort_by(f64::total_cmp);
    let want = predicted_transfer_eigenvalues(n);
    let dev = if got.len() == want.len() {
        got.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(max_im, f64::max)
    } else {
        f64::INFINITY
    };
    let summary = transfer_spectrum(n, TransferVariant::E)?;
    for &(v, m) in &summary.eigenvalues {
        tables.row("transfer_eigenvalues", vec![Cell::int(n), Cell::text("E"), Cell::real(v), Cell::int(m)]);
    }
    rep.value("spectrum", Datum::Spectrum(summary.eigenvalues.clone()));
    rep.value("max_deviation", Datum::real(dev));
    rep.value("dimension", Datum::int(got.len()));
    let mut ok = dev < tol.matching;
    if n % 2 == 0 {
        let f = transfer_spectrum(n, TransferVariant::FShared)?;
        for &(v, m) in &f.eigenvalues {
            tables.row("transfer_eigenvalues", vec![Cell::int(n), Cell::text("F"), Cell::real(v), Cell::int(m)]);
        }
        rep.value("f_spectrum", Datum::Spectrum(f.eigenvalues));
        rep.value("f_primitive", Datum::Bool(f.is_primitive));
        ok &= f.is_primitive;
    }
    rep.verdict(ok, format!("{} eigenvalues, max deviation {dev:.3e}", got.len()));
    Ok(rep)
}

fn correlation_length_check(n: usize) -> CoreResult<VerificationReport> {
    let mut rep = VerificationReport::new("", "").tol(1e-12);
    let s = transfer_spectrum(n, TransferVariant::E)?;
    let want = predicted_subleading(n);
    rep.value("subleading", Datum::real(s.subleading));
    rep.value("predicted", Datum::real(want));
    rep.value("correlation_length", Datum::real(s.correlation_length));
    rep.value("primitive", Datum::Bool(s.is_primitive));
    let dev = (s.subleading - want).abs();
    rep.verdict(dev < 1e-12, format!("subleading {} (ξ = {:.6})", s.subleading, s.correlation_length));
    Ok(rep)
}

fn two_point_decay_check(n: usize, tables: &mut Tables) -> CoreResult<VerificationReport> {
    let mut rep = VerificationReport::new("", "").tol(0.02);
    let a = antisymmetric_observable(n);
    let rs: Vec<usize> = (2..=12).collect();
    let mut vals = Vec::new();
    for &r in &rs {
        let v = two_point_correlation(n, &a, &a, r, Boundary::Omega)?.norm();
        tables.row("correlators", vec![Cell::int(n), Cell::int(r), Cell::real(v)]);
        vals.push(v);
    }
    rep.value("correlators", Datum::Reals(vals.clone()));
    // A lives in grade 2, whose eigenvalue is (n−4)/n at every n
    let rate = ((n as f64 - 4.0) / n as f64).abs();
    if n == 4 {
        // the grade-2 eigenvalue vanishes: correlations stop after one step
        let top = vals.iter().copied().fold(0.0, f64::max);
        rep.value("max_correlator", Datum::real(top));
        rep.verdict(top < 1e-14, format!("largest |C(r)| = {top:.3e}"));
        return Ok(rep);
    }
    let x: Vec<f64> = rs.iter().map(|&r| r as f64).collect();
    let y: Vec<f64> = vals.iter().map(|v| v.ln()).collect();
    let slope = fit_slope(&x, &y);
    let want = rate.ln();
    let rel = ((slope - want) / want).abs();
    rep.value("slope", Datum::real(slope));
    rep.value("predicted_slope", Datum::real(want));
    rep.value("relative_error", Datum::real(rel));
    rep.verdict(rel < 0.02, format!("slope {slope:.6} vs {want:.6}"));
    Ok(rep)
}

// ---------------------------------------------------------------------------
// rdm

fn rdm_campaign(r: &mut Runner, tol: Tolerances, caps: Caps) {
    let c = Campaign::Rdm;
    for n in r.cfg.n_list.clone() {
        for l in r.lengths(|| (1..=n + 2).collect()) {
            r.run(c, "rdm_spectrum", "ρ is a state and its grade spectrum sums to one", Some(n), Some(l), |t| {
                rdm_spectrum_check(n, l, tol, caps, t)
            });
            if n % 2 == 0 {
                let claim = if 2 * l < n { "ρ⁺ = ρ⁻ below half the rank" } else { "Tr(ρ⁺ρ⁻) = 0 from half the rank on" };
                r.run(c, "marginal_relation", claim, Some(n), Some(l), |_| marginal_relation_check(n, l, tol, caps));
            }
        }
        r.run(c, "mu_convergence", "all grade eigenvalues approach 1/rank with a non-increasing envelope", Some(n), None, |t| {
            mu_convergence_check(n, t)
        });
    }
}

fn rdm_spectrum_check(n: usize, l: usize, tol: Tolerances, caps: Caps, tables: &mut Tables) -> CoreResult<VerificationReport> {
    let mut rep = VerificationReport::new("", "").tol(tol.matching);
    let mut ok = true;
    let mut notes = Vec::new();
    for bd in boundaries(n) {
        let name = boundary_name(bd);
        let g = rdm_eigen_by_grade(n, l, bd)?;
        let trace: f64 = g.iter().map(|x| x.mu * x.multiplicity as f64).sum();
        for x in &g {
            tables.row(
                "mu",
                vec![Cell::int(n), Cell::int(l), Cell::text(name), Cell::int(x.grade), Cell::real(x.mu), Cell::int(x.multiplicity)],
            );
        }
        rep.value(&format!("{name}_trace"), Datum::real(trace));
        rep.value(&format!("{name}_rank"), Datum::int(g.iter().map(|x| x.multiplicity).sum()));
        ok &= (trace - 1.0).abs() < tol.matching;
        if pow(n, l) <= caps.dense.min(DENSE_SPECTRUM_DIM) {
            let dm = reduced_density_matrix(n, l, bd, caps.dense)?;
            let mut dense: Vec<f64> = hermitian_eigen(&dm.matrix.mat)?.values.into_iter().filter(|v| *v > 1e-12).collect();
            dense.sort_by(f64::total_cmp);
            let mut gram: Vec<f64> = g.iter().flat_map(|x| std::iter::repeat_n(x.mu, x.multiplicity)).collect();
            gram.sort_by(f64::total_cmp);
            let dev = if dense.len() == gram.len() {
                dense.iter().zip(&gram).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
            } else {
                f64::INFINITY
            };
            rep.value(&format!("{name}_dense_vs_gram"), Datum::real(dev));
            ok &= dev < 1e-9;
        } else {
            notes.push(format!("{name}: no dense cross-check above dimension {}", caps.dense.min(DENSE_SPECTRUM_DIM)));
        }
    }
    let detail = if notes.is_empty() { "traces and spectra agree".to_string() } else { notes.join("; ") };
    rep.verdict(ok, detail);
    Ok(rep)
}

fn marginal_relation_check(n: usize, l: usize, tol: Tolerances, caps: Caps) -> CoreResult<VerificationReport> {
    let mut rep = VerificationReport::new("", "").tol(tol.matching);
    if 2 * l < n {
        let f = PmFactors::new(n, l, caps.factor())?;
        let d = factored_distance(&f.plus, &f.minus)?;
        rep.value("distance", Datum::real(d));
        rep.verdict(d < tol.matching, format!("‖ρ⁺ − ρ⁻‖ = {d:.3e}"));
    } else {
        let ov = rdm_overlap(&rdm_factor(n, l, Boundary::OmegaPlus)?, &rdm_factor(n, l, Boundary::OmegaMinus)?)?;
        rep.value("overlap", Datum::real(ov));
        rep.verdict(ov < tol.matching, format!("Tr(ρ⁺ρ⁻) = {ov:.6e}"));
    }
    Ok(rep)
}

/// Largest grade-eigenvalue deviation from `1/rank`, from `ℓ = n` on until it
/// drops below [`ENVELOPE_TARGET`]. Returns `(ℓ, envelope)` pairs and the limit.
pub fn mu_envelope(n: usize) -> CoreResult<(Vec<(usize, f64)>, f64)> {
    let bd = boundaries(n)[0];
    let mut out = Vec::new();
    let mut limit = 0.0;
    for l in n..=n + ENVELOPE_MAX_EXTRA {
        let g = rdm_eigen_by_grade(n, l, bd)?;
        let rank: usize = g.iter().map(|x| x.multiplicity).sum();
        limit = 1.0 / rank as f64;
        let e = g.iter().map(|x| (x.mu - limit).abs()).fold(0.0, f64::max);
        out.push((l, e));
        if e < ENVELOPE_TARGET {
            break;
        }
    }
    Ok((out, limit))
}

fn mu_convergence_check(n: usize, tables: &mut Tables) -> CoreResult<VerificationReport> {
    let mut rep = VerificationReport::new("", "").tol(ENVELOPE_TARGET);
    let (env, limit) = mu_envelope(n)?;
    for &(l, e) in &env {
        tables.row("mu_envelope", vec![Cell::int(n), Cell::int(l), Cell::real(e)]);
    }
    let monotone = env.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-14);
    let &(last_l, last) = env.last().expect("at least one length");
    rep.value("limit", Datum::real(limit));
    rep.value("envelope", Datum::Reals(env.iter().map(|e| e.1).collect()));
    rep.value("lengths", Datum::Ints(env.iter().map(|e| e.0 as i64).collect()));
    rep.value("monotone", Datum::Bool(monotone));
    rep.value("converged_at", Datum::int(last_l));
    let ok = monotone && last < ENVELOPE_TARGET;
    rep.verdict(ok, format!("envelope {last:.3e} at l = {last_l}, monotone {monotone}"));
    Ok(rep)
}

// ---------------------------------------------------------------------------
// parent

fn kernel_options(tol: Tolerances, caps: Caps) -> KernelOptions {
    KernelOptions { tol: tol.kernel, dense_crossover: caps.dense, ..KernelOptions::default() }
}

fn parent_campaign(r: &mut Runner, tol: Tolerances, caps: Caps) {
    let c = Campaign::Parent;
    let opts = kernel_options(tol, caps);
    r.run(c, "majumdar_ghosh", "PSD kernels have dims 5, 4, 5, 4 at ℓ = 4..7", None, None, |_| {
        majumdar_ghosh_check(&opts, caps)
    });
    for n in r.cfg.n_list.clone() {
        let default = || (n..=n + 2).filter(|&l| pow(n, l) <= PARENT_DEFAULT_DIM).collect();
        for l in r.lengths(default) {
            r.run(c, "parent", "ker H_ℓ equals the MPS span", Some(n), Some(l), |_| parent_check(n, l, caps.sparse, &opts));
            r.run(c, "frustration_free", "ker of the sum equals the intersection of local kernels", Some(n), Some(l), |_| {
                let mut rep = frustration_free_check(&InteractionSpec::SoNAklt { n }, l, caps.dense, tol.kernel)?;
                rep.n = Some(n);
                Ok(rep)
            });
        }
    }
}

fn majumdar_ghosh_check(opts: &KernelOptions, caps: Caps) -> CoreResult<VerificationReport> {
    let mut rep = VerificationReport::new("", "");
    let want = [5usize, 4, 5, 4];
    let mut dims = Vec::new();
    for l in 4..=7 {
        let h = chain_hamiltonian(&InteractionSpec::MajumdarGhosh, l, caps.sparse)?;
        dims.push(kernel_basis(&h, opts)?.dim);
    }
    rep.value("kernel_dims", Datum::Ints(dims.iter().map(|&d| d as i64).collect()));
    rep.verdict(dims == want, format!("kernel dims {dims:?}"));
    Ok(rep)
}

// ---------------------------------------------------------------------------
// spt

fn spt_campaign(r: &mut Runner) {
    let c = Campaign::Spt;
    r.run(c, "aklt_spt_index", "the spin-1 AKLT tensor carries index −1", None, None, |_| {
        let idx = mps_spt_index(&MpsTensor::aklt_su2())?;
        let mut rep = VerificationReport::new("", "");
        rep.value("index", Datum::Int(idx.sign as i64));
        rep.verdict(idx.sign == -1, format!("index {}", idx.sign));
        Ok(rep)
    });
    for n in r.cfg.n_list.clone() {
        if n < 3 {
            let rep = VerificationReport::new("cocycle_sign", "").shape(n, None).skipped("the rotation pair needs n ≥ 3");
            r.run(c, "cocycle_sign", "", Some(n), None, |_| Ok(rep));
            continue;
        }
        r.run(c, "cocycle_sign", "spin representation −1, defining representation +1", Some(n), None, |_| {
            let (s, d) = (cocycle_sign(n, &CocycleRep::Spin)?, cocycle_sign(n, &CocycleRep::Defining)?);
            let mut rep = VerificationReport::new("", "").input("planes", Datum::text("e^{πL12}, e^{πL13}"));
            rep.value("spin", Datum::Int(s as i64));
            rep.value("defining", Datum::Int(d as i64));
            rep.verdict(s == -1 && d == 1, format!("spin {s}, defining {d}"));
            Ok(rep)
        });
        r.run(c, "mps_spt_index", "Clifford family −1, product baselines +1", Some(n), None, |_| spt_index_check(n));
    }
}

fn spt_index_check(n: usize) -> CoreResult<VerificationReport> {
    let mut rep = VerificationReport::new("", "");
    let family = mps_spt_index(&MpsTensor::so_n(n)?)?;
    let axis = mps_spt_index(&MpsTensor::product_axis(n)?)?;
    let dimer = mps_spt_index(&MpsTensor::product_dimer(n)?)?;
    rep.value("clifford", Datum::Int(family.sign as i64));
    rep.value("product_axis", Datum::Int(axis.sign as i64));
    rep.value("product_dimer", Datum::Int(dimer.sign as i64));
    rep.value("bond_dim", Datum::int(family.first.pi.nrows()));
    rep.value("eigenvalue_1", Datum::complex(family.first.eigenvalue));
    rep.value("eigenvalue_2", Datum::complex(family.second.eigenvalue));
    let ok = family.sign == -1 && axis.sign == 1 && dimer.sign == 1;
    rep.verdict(ok, format!("Clifford {}, products {} / {}", family.sign, axis.sign, dimer.sign));
    Ok(rep)
}

// ---------------------------------------------------------------------------
// cpt

fn cpt_campaign(r: &mut Runner, caps: Caps) {
    let c = Campaign::Cpt;
    for n in r.cfg.n_list.clone() {
        r.run(c, "theta", "θ reverses spin and has determinant 1", Some(n), None, |_| {
            let mut rep = VerificationReport::new("", "").tol(1e-12);
            let (det, flip) = (theta_det(n), theta_spin_flip_residual(n));
            rep.value("det", Datum::real(det));
            rep.value("spin_flip_residual", Datum::real(flip));
            rep.verdict((det - 1.0).abs() < 1e-12 && flip < 1e-12, format!("det {det}, flip residual {flip:.3e}"));
            Ok(rep)
        });
        let default = || {
            let mut v = vec![2, n];
            v.dedup();
            v
        };
        for l in r.lengths(default) {
            if n % 2 == 0 {
                r.run(c, "cpt", "conjugation and reflection follow n mod 4; time reversal is unbroken", Some(n), Some(l), |_| {
                    Ok(cpt_check(n, l, SYMMETRY_TOL, caps.factor())?.to_report())
                });
            }
            let seed = r.cfg.seed;
            r.run(c, "on_site_breaking", "SO(n) invariance, reflection exchange, equal spectra", Some(n), Some(l), |_| {
                let opts = OnSiteOptions { seed, tol: SYMMETRY_TOL, cap: caps.factor(), ..OnSiteOptions::default() };
                on_site_breaking_check(n, l, &opts)
            });
        }
    }
}

// ---------------------------------------------------------------------------
// clifford-selftest

fn random_element<R: Rng>(n: usize, rng: &mut R) -> CoreResult<CliffordElement> {
    let mut b = CliffordElement::zero(n);
    for _ in 0..4 {
        let bits = rng.random_range(0..1u32 << n);
        let c = C64::new(rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0);
        b = b.try_add(&CliffordElement::monomial(GammaIndex::from_bits(n, bits)?, c))?;
    }
    Ok(b)
}

/// Worst relative mismatch of products and traces between the abstract
/// algebra and its matrix realization over `samples` random pairs.
pub fn selftest(n: usize, samples: usize, seed: u64) -> CoreResult<(f64, f64, f64)> {
    let rep = matrix_rep(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (n as u64) << 32);
    let (mut prod, mut trace) = (0.0f64, 0.0f64);
    for _ in 0..samples {
        let a = random_element(n, &mut rng)?;
        let b = random_element(n, &mut rng)?;
        let ab = realize(&a.try_mul(&b)?, &rep)?.mat;
        let ra = realize(&a, &rep)?.mat;
        let rr = &ra * realize(&b, &rep)?.mat;
        prod = prod.max(frobenius(&(&ab - &rr)) / frobenius(&rr).max(1e-300));
        let (t1, t2) = (a.trace(), ra.trace());
        trace = trace.max((t1 - t2).norm() / t2.norm().max(1.0));
    }
    Ok((prod, trace, rep.anticommutation_residual()))
}

fn selftest_campaign(r: &mut Runner, tol: Tolerances) {
    let c = Campaign::CliffordSelftest;
    let seed = r.cfg.seed;
    for n in r.cfg.n_list.clone() {
        r.run(c, "clifford_selftest", "abstract and realized products and traces agree", Some(n), None, |_| {
            let (p, t, anti) = selftest(n, SELFTEST_SAMPLES, seed)?;
            let mut rep = VerificationReport::new("", "")
                .tol(tol.matching)
                .input("samples", Datum::int(SELFTEST_SAMPLES))
                .input("seed", Datum::Int(seed as i64));
            rep.value("product_residual", Datum::real(p));
            rep.value("trace_residual", Datum::real(t));
            rep.value("anticommutation_residual", Datum::real(anti));
            let ok = p < tol.matching && t < tol.matching && anti < 1e-12;
            rep.verdict(ok, format!("products {p:.3e}, traces {t:.3e}, anticommutation {anti:.3e}"));
            Ok(rep)
        });
    }
}

// ---------------------------------------------------------------------------
// repr-dims

/// Isotypic dims of `V_μ ⊗ V_ν` from the total-spin Casimir, against the
/// Clebsch-Gordan rule, for all `2μ, 2ν ≤ max_two`.
pub fn clebsch_gordan_check(max_two: u32) -> CoreResult<(bool, usize)> {
    let mut cases = 0;
    for two_mu in 0..=max_two {
        for two_nu in 0..=max_two {
            let (a, b) = (spin_matrices(two_mu), spin_matrices(two_nu));
            let (ia, ib) = (CMatrix::identity(a.dim, a.dim), CMatrix::identity(b.dim, b.dim));
            let mut cas = CMatrix::zeros(a.dim * b.dim, a.dim * b.dim);
            for (x, y) in a.components().iter().zip(b.components()) {
                let s = x.kronecker(&ib) + ia.kronecker(y);
                cas += &s * &s;
            }
            let found = isotypic_decomposition(&OperatorMatrix::new(cas))?;
            let mut want: Vec<(f64, usize)> = clebsch_gordan_dims(two_mu, two_nu)
                .into_iter()
                .map(|tj| {
                    let j = tj as f64 / 2.0;
                    (j * (j + 1.0), tj as usize + 1)
                })
                .collect();
            want.sort_by(|x, y| x.0.total_cmp(&y.0));
            let ok = found.blocks.len() == want.len()
                && found.blocks.iter().zip(&want).all(|(f, w)| f.1 == w.1 && (f.0 - w.0).abs() < 1e-8);
            let dims_ok = want.iter().map(|w| w.1).sum::<usize>() == a.dim * b.dim;
            if !(ok && dims_ok) {
                return Ok((false, cases));
            }
            cases += 1;
        }
    }
    Ok((true, cases))
}

/// `V ⊗ V` for so(n): trivial, adjoint, symmetric traceless.
pub fn predicted_square_dims(n: usize) -> Vec<usize> {
    vec![1, n * (n - 1) / 2, (n + 2) * (n - 1) / 2]
}

fn repr_campaign(r: &mut Runner) {
    let c = Campaign::ReprDims;
    r.run(c, "clebsch_gordan", "V_μ ⊗ V_ν splits into spins |μ−ν|..μ+ν for μ, ν ≤ 4", None, None, |_| {
        let (ok, cases) = clebsch_gordan_check(8)?;
        let mut rep = VerificationReport::new("", "");
        rep.value("cases", Datum::int(cases));
        rep.verdict(ok, format!("{cases} pairs checked"));
        Ok(rep)
    });
    for n in r.cfg.n_list.clone() {
        r.run(c, "isotypic_square", "V ⊗ V has blocks 1, n(n−1)/2, (n+2)(n−1)/2", Some(n), None, |_| {
            let cas = so_n_casimir(n, tensor_rep(defining_rep(n), defining_rep(n)))?;
            let dims = isotypic_decomposition(&cas)?.dims();
            let want = predicted_square_dims(n);
            let mut rep = VerificationReport::new("", "");
            rep.value("dims", Datum::Ints(dims.iter().map(|&d| d as i64).collect()));
            rep.value("predicted", Datum::Ints(want.iter().map(|&d| d as i64).collect()));
            rep.verdict(dims == want, format!("dims {dims:?}"));
            Ok(rep)
        });
        r.run(c, "pieri", "Λ^k V ⊗ V blocks agree with the Casimir clustering", Some(n), None, |_| {
            let mut rep = VerificationReport::new("", "");
            let mut bad = Vec::new();
            for k in 1..n {
                let blocks = pieri_predicted_blocks(n, k)?;
                let total: usize = blocks.iter().map(|b| b.1).sum();
                if total != binomial(n, k) * n || !pieri_casimir_agrees(n, k)? {
                    bad.push(k as i64);
                }
            }
            rep.value("failing_k", Datum::Ints(bad.clone()));
            rep.verdict(bad.is_empty(), format!("k = 1..{} checked", n - 1));
            Ok(rep)
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn predicted_spectrum_counts() {
        assert_eq!(predicted_transfer_eigenvalues(6).len(), 64);
        assert_eq!(predicted_transfer_eigenvalues(5).len(), 16);
        let n6 = predicted_transfer_eigenvalues(6);
        assert_eq!(n6.iter().filter(|&&v| (v - 1.0 / 3.0).abs() < 1e-15).count(), 15);
    }

    #[test]
    fn slope_of_a_line() {
        let x = [1.0, 2.0, 3.0];
        let y = [0.5, -1.5, -3.5];
        assert!((fit_slope(&x, &y) + 2.0).abs() < 1e-14);
    }

    #[test]
    fn square_dims() {
        assert_eq!(predicted_square_dims(3), vec![1, 3, 5]);
        assert_eq!(predicted_square_dims(5), vec![1, 10, 14]);
    }

    #[test]
    fn cap_becomes_skip() {
        let mut cfg = CampaignConfig::new(Campaign::Rdm, vec![6]);
        cfg.l_list = Some(vec![2]);
        cfg.caps.sparse = 4;
        let doc = run_campaign(&cfg);
        let rep = doc.find("rdm", "marginal_relation", Some(6), Some(2)).unwrap();
        assert_eq!(rep.status, son_core::report::Status::Skip);
        assert_eq!(rep.detail, "cap-exceeded");
    }

    #[test]
    fn empty_rank_list_gives_empty_report() {
        let doc = run_campaign(&CampaignConfig::new(Campaign::All, vec![]));
        assert!(doc.checks.is_empty());
        assert_eq!(doc.exit_code(), 0);
    }

    #[test]
    fn checks_are_sorted() {
        let doc = run_campaign(&CampaignConfig::new(Campaign::Spt, vec![4, 3]));
        let keys: Vec<_> = doc.checks.iter().map(|c| (c.report.n, c.report.check.clone())).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }
}
