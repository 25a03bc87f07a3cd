//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_3};
use std::time::Instant;

use qevo::cp_map::{kraus_rotation, KrausMap};
use qevo::evolution_measurement::MeasurementCircuit;
use qevo::evolution_store::{compress_at_tail_mass, typical_compress, RetrievalSetup};
use qevo::interaction_entanglement::{
    concentrate, concentration_yield, induced_local_map, interaction_entanglement, BipartiteUnitary, ConcentrationMode,
    OtherSide, Side,
};
use qevo::linalg::{self, identity, kron, matrix_power, max_abs_diff, pauli, root_of_unity, CMatrix, C64};
use qevo::operator_basis::{clock_shift, expand, pauli_basis, pauli_basis_identity, weyl_basis, UnitaryOperator};
use qevo::protocols::{eavesdropper_marginal, superdense_send};
use qevo::random::{haar_unitary, random_kraus_operators, random_row_isometry, seeded};
use qevo::{entropy, measure_which_unitary, measure_which_unitary_qudit, PureState};

struct Verdict {
    pass: bool,
    detail: String,
}

type Criterion = (&'static str, fn() -> Verdict);

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn binary_entropy(p: f64) -> f64 {
    -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
}

fn unitary(seed: u64, d: usize) -> UnitaryOperator {
    UnitaryOperator::new(haar_unitary(d, &mut seeded(seed))).unwrap()
}

fn probability_law() -> Verdict {
    let start = Instant::now();
    let basis = pauli_basis_identity(1).unwrap();
    let (mut gap, mut worst_z): (f64, f64) = (0.0, 0.0);
    for i in 0..100 {
        let u = unitary(1000 + i, 2);
        let psi = PureState::random(2, 2000 + i);
        let run = measure_which_unitary(&u, &basis, &psi, 100_000, 3000 + i).unwrap();
        let want = expand(u.matrix(), &basis).unwrap().probabilities();
        for (a, b) in run.distribution.probabilities.iter().zip(&want) {
            gap = gap.max((a - b).abs());
        }
        worst_z = worst_z.max(run.distribution.max_binomial_z().unwrap());
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        gap <= 1e-10 && worst_z <= 5.0 && secs < 30.0,
        format!("max |P - |C|^2| = {gap:.2e}, max z = {worst_z:.2}, {secs:.1} s"),
    )
}

fn magnetic_field() -> Verdict {
    let u = UnitaryOperator::evolution(&pauli(3), FRAC_PI_3).unwrap();
    let psi = PureState::random(2, 1);
    let run = measure_which_unitary(&u, &pauli_basis_identity(1).unwrap(), &psi, 0, 0).unwrap();
    let p = &run.distribution.probabilities;
    let own = measure_which_unitary(&u, &pauli_basis(&u).unwrap(), &psi, 0, 0).unwrap();
    let p_u = own.distribution.probabilities[0];
    let pass = (p[0] - 0.25).abs() <= 1e-12 && (p[3] - 0.75).abs() <= 1e-12 && (p_u - 1.0).abs() <= 1e-12;
    verdict(pass, format!("P(I) = {:.15}, P(Z) = {:.15}, P(U) in (U, U sigma) basis = {p_u:.15}", p[0], p[3]))
}

fn state_independence() -> Verdict {
    let basis = pauli_basis_identity(1).unwrap();
    let u = unitary(7, 2);
    let reference = measure_which_unitary(&u, &basis, &PureState::basis_state(2, 0), 0, 0).unwrap();
    let mut gap: f64 = 0.0;
    for i in 0..50 {
        let run = measure_which_unitary(&u, &basis, &PureState::random(2, 500 + i), 0, 0).unwrap();
        for (a, b) in run.distribution.probabilities.iter().zip(&reference.distribution.probabilities) {
            gap = gap.max((a - b).abs());
        }
    }
    let bell = PureState::maximally_entangled(2);
    let run = measure_which_unitary(&u, &basis, &bell, 0, 0).unwrap();
    let mut ent_gap: f64 = 0.0;
    for branch in run.branches.iter().flatten() {
        ent_gap = ent_gap.max((linalg::entanglement_entropy(branch.collapsed.amplitudes(), 2, 2) - 1.0).abs());
    }
    verdict(
        gap <= 1e-10 && ent_gap <= 1e-9,
        format!("distribution spread {gap:.2e}, entanglement change {ent_gap:.2e}"),
    )
}

fn qudit_construction() -> Verdict {
    let (z, x) = clock_shift(3).unwrap();
    let (z, x) = (z.matrix(), x.matrix());
    let zeta = root_of_unity(3, 1);
    let algebra = max_abs_diff(&(z * x), &((x * z) * zeta))
        .max(max_abs_diff(&matrix_power(z, 3), &identity(3)))
        .max(max_abs_diff(&matrix_power(x, 3), &identity(3)));
    let basis = weyl_basis(3, None).unwrap();
    let mut law: f64 = 0.0;
    for i in 0..20 {
        let u = unitary(40 + i, 3);
        let run = measure_which_unitary_qudit(&u, &basis, &PureState::random(3, 60 + i), 0, 0).unwrap();
        let want = expand(u.matrix(), &basis).unwrap().probabilities();
        for (a, b) in run.distribution.probabilities.iter().zip(&want) {
            law = law.max((a - b).abs());
        }
    }
    let circuit = MeasurementCircuit::for_basis(&basis).unwrap();
    let psi = PureState::random(3, 5);
    let mut fourier: f64 = 0.0;
    let ends: Vec<_> = (0..9).map(|a| circuit.register_state_for_element(a, &psi).unwrap()).collect();
    for (a, end) in ends.iter().enumerate() {
        fourier = fourier.max((end - circuit.expected_register_state(a)).norm());
        for (b, other) in ends.iter().enumerate() {
            let want = if a == b { 1.0 } else { 0.0 };
            fourier = fourier.max((end.dotc(other).norm() - want).abs());
        }
    }
    verdict(
        algebra <= 1e-12 && law <= 1e-10 && fourier <= 1e-10,
        format!("Weyl algebra {algebra:.2e}, |C|^2 law {law:.2e}, Fourier end states {fourier:.2e}"),
    )
}

fn map_entropy() -> Verdict {
    let s_unitary = entropy(&KrausMap::unitary(&unitary(3, 2)));
    let s_deph = entropy(&KrausMap::dephasing(0.5).unwrap());
    let s_depol = entropy(&KrausMap::depolarizing(1.0, 2).unwrap());
    let mut rng = seeded(77);
    let mut drift: f64 = 0.0;
    for i in 0..50 {
        let map = KrausMap::new(random_kraus_operators(2, 3, &mut rng)).unwrap();
        let mix = if i % 2 == 0 { haar_unitary(3, &mut rng) } else { random_row_isometry(3, 5, &mut rng) };
        drift = drift.max((entropy(&map) - entropy(&kraus_rotation(&map, &mix).unwrap())).abs());
    }
    let pass =
        s_unitary.abs() <= 1e-9 && (s_deph - 1.0).abs() <= 1e-9 && (s_depol - 2.0).abs() <= 1e-9 && drift <= 1e-9;
    verdict(
        pass,
        format!(
            "unitary {s_unitary:.2e}, dephasing {s_deph:.12}, depolarizing {s_depol:.12}, rotation drift {drift:.2e}"
        ),
    )
}

fn compression() -> Verdict {
    let map = KrausMap::new(vec![identity(2) * C64::from(0.75f64.sqrt()), pauli(3) * C64::from(0.5)]).unwrap();
    let h = binary_entropy(0.75);
    let rates: Vec<f64> = [4, 8, 12, 16].iter().map(|&n| compress_at_tail_mass(&map, n, 0.01).unwrap().rate).collect();
    let gaps: Vec<f64> = rates.iter().map(|r| (r - h).abs()).collect();
    let monotone = gaps.windows(2).all(|w| w[1] < w[0]);
    let uniform = typical_compress(&KrausMap::dephasing(0.5).unwrap(), 10, 0.01).unwrap().kept_dim;
    verdict(monotone && uniform == 1024, format!("rates {rates:.4?} toward {h:.4}, uniform n=10 keeps {uniform}"))
}

fn retrieval() -> Verdict {
    let phase = UnitaryOperator::evolution(&pauli(3), 0.4).unwrap();
    let half = C64::from(FRAC_1_SQRT_2);
    let phase_map = KrausMap::new(vec![phase.matrix() * half, phase.adjoint().matrix() * half]).unwrap();
    let psi = PureState::random(2, 9);
    let phase_stats =
        RetrievalSetup::prepare(&phase_map.operators()[0], &phase_map, &psi).unwrap().run_trials(100_000, 1);

    // Pauli channel written so that its first Kraus operator is U/2
    let u = haar_unitary(2, &mut seeded(21));
    let coeffs = expand(&u, &pauli_basis_identity(1).unwrap()).unwrap().coeffs;
    let mix = linalg::complete_to_unitary(&CMatrix::from_iterator(4, 1, coeffs));
    let generic_map = kraus_rotation(&KrausMap::depolarizing(1.0, 2).unwrap(), &mix).unwrap();
    let generic_stats =
        RetrievalSetup::prepare(&generic_map.operators()[0], &generic_map, &psi).unwrap().run_trials(100_000, 2);

    let exact_ok =
        (phase_stats.exact_success - 0.5).abs() < 1e-12 && (generic_stats.exact_success - 0.25).abs() < 1e-12;
    let z_ok = phase_stats.z_score <= 5.0 && generic_stats.z_score <= 5.0;
    let fidelity = phase_stats.min_fidelity.min(generic_stats.min_fidelity);
    verdict(
        exact_ok && z_ok && (1.0 - fidelity) <= 1e-9,
        format!(
            "phase gate {:.4} (z {:.2}), generic unitary {:.4} (z {:.2}), min fidelity {:.12}",
            phase_stats.empirical_success,
            phase_stats.z_score,
            generic_stats.empirical_success,
            generic_stats.z_score,
            fidelity
        ),
    )
}

fn superdense() -> Verdict {
    let mut distance: f64 = 0.0;
    for (d, basis) in [(2, pauli_basis_identity(1).unwrap()), (3, weyl_basis(3, None).unwrap())] {
        for i in 0..50 {
            let rho = eavesdropper_marginal(&unitary(900 + i, d), &basis).unwrap();
            distance = distance.max(max_abs_diff(&rho, &(identity(d) / C64::from(d as f64))));
        }
    }
    let basis = pauli_basis_identity(1).unwrap();
    let mut classical = true;
    for alpha in 0..4 {
        let u = UnitaryOperator::new(basis.element(alpha).clone()).unwrap();
        let t = superdense_send(&u, &basis, 1000, alpha as u64).unwrap();
        classical &= t.classical_symbol == Some(alpha)
            && t.bob.counts.as_ref().unwrap()[alpha] == 1000
            && t.bits_per_qudit == Some(2.0);
    }
    verdict(
        distance < 1e-12 && classical,
        format!("max marginal distance {distance:.2e}, classical decoding exact: {classical}"),
    )
}

fn operator_schmidt() -> Verdict {
    let mut rng = seeded(5);
    let product = BipartiteUnitary::product(&haar_unitary(2, &mut rng), &haar_unitary(3, &mut rng)).unwrap();
    let maximal = BipartiteUnitary::new(
        (kron(&identity(2), &identity(2)) + kron(&pauli(1), &pauli(1)) * C64::new(0.0, 1.0)) * C64::from(FRAC_1_SQRT_2),
        2,
        2,
    )
    .unwrap();
    let values = [
        interaction_entanglement(&BipartiteUnitary::cnot()).unwrap(),
        interaction_entanglement(&BipartiteUnitary::swap()).unwrap(),
        interaction_entanglement(&product).unwrap(),
        interaction_entanglement(&maximal).unwrap(),
    ];
    let want = [1.0, 2.0, 0.0, 1.0];
    let gap = values.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let mut agreement: f64 = 0.0;
    for (i, (da, db)) in [(2, 2), (2, 3), (3, 3)].into_iter().enumerate() {
        for j in 0..10 {
            let u = BipartiteUnitary::new(haar_unitary(da * db, &mut seeded((i * 100 + j) as u64)), da, db).unwrap();
            let induced = entropy(&induced_local_map(&u, Side::A, &OtherSide::MaximallyMixed).unwrap());
            agreement = agreement.max((interaction_entanglement(&u).unwrap() - induced).abs());
        }
    }
    verdict(gap <= 1e-9 && agreement <= 1e-9, format!("S_U {values:.12?}, induced-map agreement {agreement:.2e}"))
}

fn concentration() -> Verdict {
    let (alpha, beta) = (C64::new(0.6, 0.48), C64::new(0.0, 0.64));
    let mut gap: f64 = 0.0;
    for n in 1..=4 {
        let c = concentrate(n, alpha, beta, ConcentrationMode::Exact, 0, 0).unwrap();
        for (s, e) in c.sectors.iter().zip(c.exact.as_ref().unwrap()) {
            let k = s.k as i32;
            let formula = qevo::interaction_entanglement::binomial(n, s.k) as f64
                * alpha.norm_sqr().powi(k)
                * beta.norm_sqr().powi(n as i32 - k);
            gap = gap.max((e.projected_probability - formula).abs());
        }
    }
    let a2: f64 = 0.75;
    let h = binary_entropy(a2);
    let rel = |n: usize| (concentration_yield(n, a2.sqrt()).unwrap() / n as f64 - h).abs() / h;
    let (r16, r32) = (rel(16), rel(32));
    verdict(
        gap <= 1e-10 && r16 <= 0.15 && r32 < r16,
        format!(
            "exact sectors {gap:.2e}, yield/n relative gap {:.1}% at n=16, {:.1}% at n=32",
            100.0 * r16,
            100.0 * r32
        ),
    )
}

fn main() {
    let start = Instant::now();
    let criteria: [Criterion; 10] = [
        ("probability law", probability_law),
        ("magnetic-field example", magnetic_field),
        ("state independence and entanglement preservation", state_independence),
        ("qudit construction", qudit_construction),
        ("map entropy", map_entropy),
        ("compression", compression),
        ("probabilistic retrieval", retrieval),
        ("super-dense coding", superdense),
        ("operator Schmidt and S_U", operator_schmidt),
        ("concentration", concentration),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let v = check();
        if !v.pass {
            failed += 1;
        }
        println!("criterion {:>2}: {} {name}: {}", i + 1, if v.pass { "PASS" } else { "FAIL" }, v.detail);
    }
    println!("acceptance: {}/10 passed in {:.1} s", 10 - failed, start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
