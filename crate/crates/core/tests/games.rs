mod common;

use common::*;
use qcoord::games::*;
use qcoord::qla::linalg::CMatrix;
use qcoord::qla::DensityOperator;

fn tsirelson() -> f64 {
    (std::f64::consts::PI / 8.0).cos().powi(2)
}

#[test]
fn trivial_povms_give_deterministic_correlation() {
    let game = GameSpec::always_win([1, 1, 1, 1]).unwrap();
    let rho = DensityOperator::maximally_mixed(layout(&[("M1", 2)]))
        .tensor(&ket("M2", 2, 0).to_density())
        .unwrap();
    let s = Strategy::new(rho, vec![vec![CMatrix::identity(2, 2)]], vec![vec![CMatrix::identity(2, 2)]]).unwrap();
    let corr = correlation_from_strategy(&game, &s).unwrap();
    assert_eq!(corr.table(), &[1.0]);
}

#[test]
fn epr_z_measurements_are_perfectly_correlated() {
    let z0 = mat(2, 2, &[(1.0, 0.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0)]);
    let z1 = mat(2, 2, &[(0.0, 0.0), (0.0, 0.0), (0.0, 0.0), (1.0, 0.0)]);
    let epr = bell("M1", "M2").to_density();
    let s = Strategy::new(epr, vec![vec![z0.clone(), z1.clone()]], vec![vec![z0, z1]]).unwrap();
    let game = GameSpec::always_win([1, 1, 2, 2]).unwrap();
    let corr = correlation_from_strategy(&game, &s).unwrap();
    for (got, want) in corr.table().iter().zip([0.5, 0.0, 0.0, 0.5]) {
        assert_close(*got, want, 1e-12);
    }
}

#[test]
fn chsh_correlation_and_value() {
    let game = GameSpec::chsh();
    let corr = correlation_from_strategy(&game, &chsh_strategy()).unwrap();
    // every winning entry pair sums to cos^2(pi/8): each of the two is half of it
    for x in 0..2 {
        for y in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    let want = if game.wins(x, y, b, c) { tsirelson() / 2.0 } else { (1.0 - tsirelson()) / 2.0 };
                    assert_close(corr.get(x, y, b, c), want, 1e-12);
                }
            }
        }
    }
    assert!(corr.no_signaling_residual() <= 1e-9);
    assert_close(win_probability(&game, &corr).unwrap(), tsirelson(), 1e-9);
    assert_close(tsirelson(), 0.85355, 5e-6);
}

#[test]
fn win_probability_examples() {
    let always = GameSpec::always_win([2, 3, 2, 2]).unwrap();
    let uniform = Correlation::new([2, 3, 2, 2], vec![0.25; 24]).unwrap();
    assert_close(win_probability(&always, &uniform).unwrap(), 1.0, 1e-15);
    let chsh = GameSpec::chsh();
    let uniform = Correlation::new([2, 2, 2, 2], vec![0.25; 16]).unwrap();
    assert_close(win_probability(&chsh, &uniform).unwrap(), 0.5, 1e-15);
    assert!(win_probability(&always, &Correlation::new([2, 2, 2, 2], vec![0.25; 16]).unwrap()).is_err());
}

#[test]
fn win_probability_is_linear() {
    let chsh = GameSpec::chsh();
    let p = correlation_from_strategy(&chsh, &chsh_strategy()).unwrap();
    let q = Correlation::new([2, 2, 2, 2], vec![0.25; 16]).unwrap();
    for lambda in [0.0, 0.3, 0.77, 1.0] {
        let mixed = win_probability(&chsh, &p.mix(&q, lambda).unwrap()).unwrap();
        let split = lambda * win_probability(&chsh, &p).unwrap() + (1.0 - lambda) * win_probability(&chsh, &q).unwrap();
        assert_close(mixed, split, 1e-12);
    }
}

#[test]
fn classical_values() {
    assert_eq!(classical_value(&GameSpec::chsh()).unwrap(), 0.75);
    assert_eq!(classical_value(&GameSpec::always_win([2, 2, 3, 3]).unwrap()).unwrap(), 1.0);
    assert_close(classical_value(&GameSpec::magic_square()).unwrap(), 8.0 / 9.0, 1e-12);
    let big = GameSpec::always_win([8, 8, 8, 8]).unwrap();
    assert!(classical_value(&big).unwrap_err().is_guard());
}

#[test]
fn quantum_beats_classical_chsh() {
    let game = GameSpec::chsh();
    let q = win_probability(&game, &correlation_from_strategy(&game, &chsh_strategy()).unwrap()).unwrap();
    assert!(q - classical_value(&game).unwrap() >= 0.10);
}

#[test]
fn magic_square_is_won_with_two_ebits() {
    let game = GameSpec::magic_square();
    let s = magic_square_strategy();
    assert_eq!((s.m1_dim(), s.m2_dim()), (4, 4));
    let corr = correlation_from_strategy(&game, &s).unwrap();
    assert!(corr.no_signaling_residual() <= 1e-9);
    assert_close(win_probability(&game, &corr).unwrap(), 1.0, 1e-9);
}

#[test]
fn required_rates() {
    let chsh = GameSpec::chsh();
    let r = required_broadcast_rates(&chsh, &chsh_strategy()).unwrap();
    assert_close(r.value("Q1").unwrap(), 1.0, 1e-9);
    assert_close(r.value("Q2").unwrap(), 1.0, 1e-9);

    // deterministic answers b = x, c = 0
    let mut t = vec![0.0; 16];
    for x in 0..2 {
        for y in 0..2 {
            t[((x * 2 + y) * 2 + x) * 2] = 1.0;
        }
    }
    let det = Correlation::new([2, 2, 2, 2], t).unwrap();
    let r = rates_for_correlation(&chsh, &det).unwrap();
    assert!(r.value("Q1").unwrap() < 1e-12 && r.value("Q2").unwrap() < 1e-12);

    let uniform = Correlation::new([2, 2, 2, 2], vec![0.25; 16]).unwrap();
    let r = rates_for_correlation(&chsh, &uniform).unwrap();
    assert_close(r.value("Q1").unwrap(), 1.0, 1e-9);
    assert_close(r.value("Q2").unwrap(), 1.0, 1e-9);
}

#[test]
fn game_file_round_trip() {
    let text = r#"{"x":2,"y":2,"b":2,"c":2,
        "win":[[[[1,0],[0,1]],[[1,0],[0,1]]],[[[1,0],[0,1]],[[0,1],[1,0]]]]}"#;
    let file: GameFile = serde_json::from_str(text).unwrap();
    let game = GameSpec::from_file(&file).unwrap();
    assert_eq!(game, GameSpec::chsh());
}
