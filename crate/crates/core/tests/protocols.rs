use ionsel::hamiltonians::RamanParams;
use ionsel::protocols::{
    generate_fock, measure_population, selective_cool, wigner, Execution, Shots, WignerConvention, WignerMethod,
};
use ionsel::space::ModeSpace;
use ionsel::state::{fidelity, fock_populations, thermal_state, PureState, State};
use ionsel::C64;
use proptest::prelude::*;

fn p() -> RamanParams {
    RamanParams::new(1e6, 1e6, 1e8, 0.1, 0.002, 1e6)
}

fn coherent(cutoff: usize, re: f64, im: f64) -> State {
    PureState::coherent(ModeSpace::new(cutoff).unwrap(), C64::new(re, im)).unwrap().into()
}

#[test]
fn generated_fock_state_measures_as_itself() {
    let r = generate_fock(&coherent(20, 1.2, 0.0), 1, &p(), Execution::Ideal).unwrap();
    let m = measure_population(&r.post_state, 2, &p(), Shots::Exact, Execution::Ideal).unwrap();
    assert!((m.estimate - 1.0).abs() < 1e-12);
}

#[test]
fn cooled_state_has_vacuum_wigner() {
    let thermal: State = thermal_state(ModeSpace::new(25).unwrap(), 0.4).unwrap().into();
    let cooled = selective_cool(&thermal, &p(), Execution::Ideal).unwrap();
    let w = wigner(
        &cooled.post_state,
        &[C64::new(0.0, 0.0), C64::new(0.5, 0.5)],
        &p(),
        WignerConvention::Paper,
        WignerMethod::Protocol,
        Execution::Ideal,
    )
    .unwrap();
    assert!((w.values[0] - 2.0).abs() < 1e-10);
    assert!((w.values[1] - 2.0 * (-1.0f64).exp()).abs() < 1e-10);
}

#[test]
fn effective_cooling_tracks_ideal() {
    let thermal: State = thermal_state(ModeSpace::new(20).unwrap(), 0.5).unwrap().into();
    let ideal = selective_cool(&thermal, &p(), Execution::Ideal).unwrap();
    let eff = selective_cool(&thermal, &p(), Execution::Effective).unwrap();
    assert!((ideal.herald_probability - eff.herald_probability).abs() < 0.02);
    let ground: State = PureState::fock(ModeSpace::new(20).unwrap(), 0).unwrap().into();
    assert!(fidelity(&eff.post_state, &ground).unwrap() > 0.95);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ideal_herald_is_fock_weight(re in -1.5f64..1.5, im in -1.5f64..1.5, n0 in 0usize..5) {
        let s = coherent(24, re, im);
        let weights = fock_populations(&s).unwrap();
        prop_assume!(weights[n0] > 1e-6);
        let r = generate_fock(&s, n0, &p(), Execution::Ideal).unwrap();
        prop_assert!((r.herald_probability - weights[n0]).abs() < 1e-12);
        let target: State = PureState::fock(ModeSpace::new(24).unwrap(), n0 + 1).unwrap().into();
        prop_assert!((fidelity(&r.post_state, &target).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exact_measurement_matches_weights(nbar in 0.05f64..1.5, n0 in 0usize..4) {
        let s: State = thermal_state(ModeSpace::new(30).unwrap(), nbar).unwrap().into();
        let want = fock_populations(&s).unwrap()[n0];
        let m = measure_population(&s, n0, &p(), Shots::Exact, Execution::Ideal).unwrap();
        prop_assert!((m.estimate - want).abs() < 1e-12);
    }

    #[test]
    fn wigner_protocol_matches_oracle(re in -1.0f64..1.0, im in -1.0f64..1.0, x in -1.5f64..1.5, y in -1.5f64..1.5) {
        let s = coherent(25, re, im);
        let grid = [C64::new(x, y)];
        let run = |m| wigner(&s, &grid, &p(), WignerConvention::Paper, m, Execution::Ideal).unwrap().values[0];
        prop_assert!((run(WignerMethod::Protocol) - run(WignerMethod::Oracle)).abs() < 1e-8);
    }
}
