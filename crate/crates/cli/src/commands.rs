use anyhow::{anyhow, bail, Context, Result};
use serde_json::{json, Value};

use qevo::cp_map::{choi_distance, computational_basis, fourier_basis};
use qevo::evolution_store::{compress_at_tail_mass, RetrievalSetup};
use qevo::interaction_entanglement::{default_basis, OtherSide, Side};
use qevo::io::{load_map, load_matrix, load_state, load_unitary};
use qevo::linalg::{self, density, max_abs_diff};
use qevo::{
    apply, canonical_kraus, choi, concentrate, entropy, expand, induced_local_map, interaction_entanglement,
    kraus_from_ancilla_basis, measure_which_unitary, measure_which_unitary_qudit, operator_schmidt, pauli_basis,
    stinespring, superdense_send, typical_compress, verify_sequence, weyl_basis, BipartiteUnitary, ConcentrationMode,
    EvolutionSequence, OperatorBasis, PureState, UnitaryOperator, C64,
};

use crate::report::{Checks, Report};
use crate::{AncillaBasis, BasisKind, Command, GlobalArgs, ModeArg};

pub fn run(command: &Command, global: &GlobalArgs) -> Result<Report> {
    let config = json!({ "seed": global.seed, "tol": global.tol, "args": command });
    let tol = global.tol;
    let (name, exact, empirical, checks) = match command {
        Command::Basis { basis, dim, u0 } => basis_cmd(*basis, *dim, u0.as_deref(), tol)?,
        Command::Measure { unitary, basis, u0, state, shots } => {
            let seed = seed_for(global, *shots, "--shots")?;
            measure_cmd(unitary, *basis, u0.as_deref(), state, *shots, seed, tol)?
        }
        Command::Channel { map } => channel_cmd(map, tol)?,
        Command::Compress { map, n, delta, tail } => compress_cmd(map, *n, *delta, *tail, tol)?,
        Command::Retrieve { map, op_index, state, trials } => {
            let seed = seed_for(global, *trials, "--trials")?;
            retrieve_cmd(map, *op_index, state, *trials, seed, tol)?
        }
        Command::Schmidt { unitary, dims } => schmidt_cmd(unitary, dims, tol)?,
        Command::Concentrate { n, alpha, beta, mode, samples } => {
            let seed = seed_for(global, *samples, "--samples")?;
            concentrate_cmd(*n, *alpha, *beta, *mode, *samples, seed, tol)?
        }
        Command::Superdense { unitary, dim, shots } => {
            let seed = seed_for(global, *shots, "--shots")?;
            superdense_cmd(unitary, *dim, *shots, seed, tol)?
        }
        Command::Verify { map, claimed, ancilla } => {
            let seed = global.seed.ok_or_else(|| anyhow!("verify samples ancilla outcomes: --seed is required"))?;
            verify_cmd(map, claimed, *ancilla, seed, tol)?
        }
    };
    Ok(Report::new(name, config, exact, empirical, checks))
}

type Outcome = (&'static str, Value, Option<Value>, Checks);

fn seed_for(global: &GlobalArgs, count: u64, flag: &str) -> Result<u64> {
    match (count, global.seed) {
        (0, s) => Ok(s.unwrap_or(0)),
        (_, Some(s)) => Ok(s),
        (_, None) => bail!("{flag} > 0 samples outcomes: --seed is required"),
    }
}

fn build_basis(kind: BasisKind, d: usize, u0: Option<&str>) -> Result<OperatorBasis> {
    let u0 = match u0 {
        Some(spec) => load_unitary(spec).with_context(|| format!("loading --u0 '{spec}'"))?,
        None => UnitaryOperator::identity(d),
    };
    if u0.dim() != d {
        bail!("dimension conflict: --u0 has dimension {}, system has {d}", u0.dim());
    }
    Ok(match kind {
        BasisKind::Pauli => {
            if !d.is_power_of_two() || d < 2 {
                bail!("dimension conflict: Pauli basis needs a power of two, got {d}");
            }
            pauli_basis(&u0)?
        }
        BasisKind::Weyl => weyl_basis(d, Some(&u0))?,
    })
}

fn basis_cmd(kind: BasisKind, d: usize, u0: Option<&str>, tol: f64) -> Result<Outcome> {
    let basis = build_basis(kind, d, u0)?;
    let worst_unitarity = basis.elements().iter().map(linalg::unitarity_deviation).fold(0.0, f64::max);
    let mut checks = Checks::default();
    checks
        .at_most("gram_deviation", basis.gram_deviation(), tol)
        .at_most("element_unitarity", worst_unitarity, tol)
        .holds("size_is_d_squared", basis.len() == d * d);
    let exact = json!({ "dim": d, "size": basis.len(), "labels": basis.labels() });
    Ok(("basis", exact, None, checks))
}

fn measure_cmd(
    unitary: &str,
    kind: BasisKind,
    u0: Option<&str>,
    state: &str,
    shots: u64,
    seed: u64,
    tol: f64,
) -> Result<Outcome> {
    let u = load_unitary(unitary).with_context(|| format!("loading --unitary '{unitary}'"))?;
    let basis = build_basis(kind, u.dim(), u0)?;
    let psi = load_state(state, u.dim()).with_context(|| format!("loading --state '{state}'"))?;
    let run = match kind {
        BasisKind::Pauli => measure_which_unitary(&u, &basis, &psi, shots, seed)?,
        BasisKind::Weyl => measure_which_unitary_qudit(&u, &basis, &psi, shots, seed)?,
    };
    let coeffs = expand(u.matrix(), &basis)?;
    let squared = coeffs.probabilities();
    let probability_gap =
        run.distribution.probabilities.iter().zip(&squared).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let mut collapse_gap: f64 = 0.0;
    for (alpha, branch) in run.branches.iter().enumerate() {
        if let Some(result) = branch {
            let want = PureState::normalized(basis.element(alpha) * psi.amplitudes())?;
            collapse_gap = collapse_gap.max(1.0 - result.collapsed.fidelity(&want));
        }
    }
    let mut checks = Checks::default();
    checks
        .at_most("probabilities_match_coefficients", probability_gap, tol)
        .at_most("total_probability", (run.distribution.total() - 1.0).abs(), tol)
        .at_most("collapsed_state_infidelity", collapse_gap, tol);
    let exact = json!({
        "labels": run.distribution.labels,
        "probabilities": run.distribution.probabilities,
        "coefficients": coeffs.coeffs,
    });
    let empirical = run.distribution.counts.as_ref().map(|counts| {
        json!({
            "shots": shots,
            "counts": counts,
            "frequencies": run.distribution.empirical(),
            "max_binomial_z": run.distribution.max_binomial_z(),
        })
    });
    Ok(("measure", exact, empirical, checks))
}

fn channel_cmd(spec: &str, tol: f64) -> Result<Outcome> {
    let map = load_map(spec).with_context(|| format!("loading --map '{spec}'"))?;
    let d = map.dim();
    let state = choi(&map);
    let diag = state.diagnostics();
    let canonical = canonical_kraus(&map);
    let s = entropy(&map);
    let dil = stinespring(&map);
    let rho = density(PureState::random(d, 1).amplitudes());
    let dilation_gap = max_abs_diff(&dil.apply(&rho)?, &apply(&map, &rho)?);
    let mut checks = Checks::default();
    checks
        .at_most("trace_preservation", map.trace_preservation_deviation(), tol)
        .at_most("choi_hermiticity", diag.hermiticity, tol)
        .at_most("choi_negativity", (-diag.min_eigenvalue).max(0.0), tol)
        .at_most("choi_trace", diag.trace_error, tol)
        .at_most("choi_marginal", diag.marginal_error, tol)
        .at_most("canonical_orthogonality", canonical.orthogonality_deviation(), tol)
        .at_most("canonical_equivalence", choi_distance(&canonical.to_map(), &map), tol)
        .at_most("dilation_reproduces_map", dilation_gap, tol)
        .holds("entropy_bounded", s <= 2.0 * (d as f64).log2() + tol);
    let exact = json!({
        "dim": d,
        "kraus_count": map.len(),
        "choi_eigenvalues": state.eigenvalues(),
        "canonical_probabilities": canonical.probabilities,
        "support": canonical.support(),
        "entropy_bits": s,
        "ancilla_dim": dil.ancilla_dim(),
    });
    Ok(("channel", exact, None, checks))
}

fn compress_cmd(spec: &str, n: usize, delta: f64, tail: Option<f64>, tol: f64) -> Result<Outcome> {
    let map = load_map(spec).with_context(|| format!("loading --map '{spec}'"))?;
    let typical = typical_compress(&map, n, delta)?;
    let support = canonical_kraus(&map).support();
    let mut checks = Checks::default();
    if let Some(rate) = typical.rate {
        checks.at_most("rate_within_slack", ((rate - typical.entropy).abs() - typical.rate_slack).max(0.0), tol);
    }
    checks
        .holds(
            "kept_within_support_strings",
            (typical.kept_dim as f64).log2() <= n as f64 * (support as f64).log2() + tol,
        )
        .at_most("mass_accounting", (typical.typical_mass + typical.infidelity_bound - 1.0).abs(), tol);
    let fixed = match tail {
        Some(eps) => {
            let f = compress_at_tail_mass(&map, n, eps)?;
            checks.holds("tail_within_target", f.tail_mass <= eps + tol);
            Some(f)
        }
        None => None,
    };
    let exact = json!({ "typical": typical, "fixed_tail": fixed, "support": support });
    Ok(("compress", exact, None, checks))
}

fn retrieve_cmd(spec: &str, op_index: usize, state: &str, trials: u64, seed: u64, tol: f64) -> Result<Outcome> {
    let map = load_map(spec).with_context(|| format!("loading --map '{spec}'"))?;
    let op = map
        .operators()
        .get(op_index)
        .ok_or_else(|| anyhow!("--op-index {op_index} out of range: map has {} operators", map.len()))?;
    let psi = load_state(state, map.dim()).with_context(|| format!("loading --state '{state}'"))?;
    let setup = RetrievalSetup::prepare(op, &map, &psi)?;
    let mut checks = Checks::default();
    checks
        .at_most("success_matches_prediction", (setup.success_probability() - setup.predicted_success()).abs(), tol)
        .at_most("herald_infidelity", 1.0 - setup.herald_fidelity(), tol)
        .at_most("total_probability", (setup.total_probability() - 1.0).abs(), tol);
    let exact = json!({
        "support": setup.support(),
        "basis": setup.basis_kind(),
        "success_probability": setup.success_probability(),
        "predicted_success": setup.predicted_success(),
    });
    let empirical = (trials > 0).then(|| serde_json::to_value(setup.run_trials(trials, seed))).transpose()?;
    Ok(("retrieve", exact, empirical, checks))
}

fn parse_dims(dims: &str) -> Result<(usize, usize)> {
    let (a, b) = dims.split_once(',').ok_or_else(|| anyhow!("--dims must look like 'dA,dB', got '{dims}'"))?;
    Ok((a.trim().parse().context("parsing dA")?, b.trim().parse().context("parsing dB")?))
}

fn schmidt_cmd(unitary: &str, dims: &str, tol: f64) -> Result<Outcome> {
    let (da, db) = parse_dims(dims)?;
    let m = load_matrix(unitary).with_context(|| format!("loading --unitary '{unitary}'"))?;
    if m.nrows() != da * db {
        bail!("dimension conflict: unitary is {}x{}, --dims gives {}", m.nrows(), m.ncols(), da * db);
    }
    let u = BipartiteUnitary::new(m, da, db)?;
    let schmidt = operator_schmidt(&u, &default_basis(da)?, &default_basis(db)?)?;
    let s_u = interaction_entanglement(&u)?;
    let induced = entropy(&induced_local_map(&u, Side::A, &OtherSide::MaximallyMixed)?);
    let mut checks = Checks::default();
    checks
        .at_most("weights_sum_to_one", (schmidt.weights().iter().sum::<f64>() - 1.0).abs(), tol)
        .at_most("reconstruction", max_abs_diff(&schmidt.reconstruct(), u.matrix()), tol)
        .at_most("matches_induced_map_entropy", (s_u - induced).abs(), tol);
    let exact = json!({
        "dims": [da, db],
        "schmidt_values": schmidt.values,
        "rank": schmidt.rank(),
        "interaction_entanglement_bits": s_u,
        "induced_map_entropy_bits": induced,
    });
    Ok(("schmidt", exact, None, checks))
}

fn concentrate_cmd(
    n: usize,
    alpha: f64,
    beta: Option<f64>,
    mode: ModeArg,
    samples: u64,
    seed: u64,
    tol: f64,
) -> Result<Outcome> {
    let beta = beta.unwrap_or_else(|| (1.0 - alpha * alpha).max(0.0).sqrt());
    let mode = match mode {
        ModeArg::Exact => ConcentrationMode::Exact,
        ModeArg::Comb => ConcentrationMode::Combinatorial,
    };
    let c = concentrate(n, C64::from(alpha), C64::from(beta), mode, samples, seed)?;
    let a2 = alpha * alpha;
    let h = linalg::shannon_entropy_bits(&[a2, 1.0 - a2]);
    let mut checks = Checks::default();
    checks.at_most("total_probability", (c.total_probability - 1.0).abs(), tol);
    if let Some(exact) = &c.exact {
        let mut prob_gap: f64 = 0.0;
        let mut spread: f64 = 0.0;
        let mut ent_gap: f64 = 0.0;
        for (s, e) in c.sectors.iter().zip(exact) {
            prob_gap = prob_gap.max((s.probability - e.projected_probability).abs());
            spread = spread.max(e.weight_spread);
            if s.probability > 1e-12 {
                ent_gap = ent_gap.max((e.block_entanglement - s.log2_terms()).abs());
            }
        }
        checks
            .at_most("sector_projection_matches_binomial", prob_gap, tol)
            .at_most("equal_term_weights", spread, tol)
            .at_most("block_entanglement_is_log_terms", ent_gap, tol);
    }
    let sectors: Vec<Value> = c
        .sectors
        .iter()
        .map(|s| json!({ "k": s.k, "term_count": s.term_count, "probability": s.probability }))
        .collect();
    let exact = json!({
        "n": n,
        "alpha": alpha,
        "beta": beta,
        "sectors": sectors,
        "argmax_k": c.argmax_k(),
        "expected_log2_terms": c.expected_log2_terms,
        "yield_per_copy": c.expected_log2_terms / n as f64,
        "entropy_bits": h,
    });
    let empirical = (samples > 0).then(|| {
        let mut hist = vec![0u64; n + 1];
        for &k in &c.samples {
            hist[k] += 1;
        }
        json!({ "samples": samples, "k_counts": hist })
    });
    Ok(("concentrate", exact, empirical, checks))
}

fn superdense_cmd(unitary: &str, dim: usize, shots: u64, seed: u64, tol: f64) -> Result<Outcome> {
    let u = load_unitary(unitary).with_context(|| format!("loading --unitary '{unitary}'"))?;
    if u.dim() != dim {
        bail!("dimension conflict: unitary has dimension {}, --dim is {dim}", u.dim());
    }
    let basis = default_basis(dim)?;
    let t = superdense_send(&u, &basis, shots, seed)?;
    let squared: Vec<f64> = t.coefficients.iter().map(|c| c.norm_sqr()).collect();
    let gap = t.bob.probabilities.iter().zip(&squared).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let mut checks = Checks::default();
    checks
        .at_most("bob_matches_coefficients", gap, tol)
        .at_most("total_probability", (t.bob.total() - 1.0).abs(), tol)
        .at_most("eavesdropper_distance", t.eavesdropper_distance, tol);
    let empirical = t.bob.counts.as_ref().map(|counts| json!({ "shots": shots, "counts": counts }));
    let exact = serde_json::to_value(&t)?;
    Ok(("superdense", exact, empirical, checks))
}

fn verify_cmd(spec: &str, claimed: &str, ancilla: AncillaBasis, seed: u64, tol: f64) -> Result<Outcome> {
    let map = load_map(spec).with_context(|| format!("loading --map '{spec}'"))?;
    let indices = claimed
        .split(',')
        .map(|s| s.trim().parse::<usize>().with_context(|| format!("parsing --claimed entry '{s}'")))
        .collect::<Result<Vec<_>>>()?;
    let dil = stinespring(&map);
    let basis = match ancilla {
        AncillaBasis::Computational => computational_basis(dil.ancilla_dim()),
        AncillaBasis::Fourier => fourier_basis(dil.ancilla_dim()),
    };
    let induced = kraus_from_ancilla_basis(&dil, &basis)?;
    let sequence = EvolutionSequence::new(induced.clone(), indices)?;
    let report = verify_sequence(&dil, &basis, &sequence, seed)?;
    let mut checks = Checks::default();
    checks.at_most("induced_equivalent_to_map", choi_distance(&induced, &map), tol).at_most(
        "outcome_probabilities_sum",
        (report.outcome_probabilities.iter().sum::<f64>() - 1.0).abs(),
        tol,
    );
    let exact = json!({
        "ancilla_dim": dil.ancilla_dim(),
        "outcome_probabilities": report.outcome_probabilities,
        "acceptance_probability": report.acceptance_probability,
    });
    let empirical = json!({
        "verified": report.verified,
        "record": report.record,
        "mismatches": report.mismatches,
    });
    Ok(("verify", exact, Some(empirical), checks))
}
