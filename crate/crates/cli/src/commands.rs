use std::collections::BTreeMap;
use std::path::Path;

use qcoord::entropy::{von_neumann_entropy, EntropyReport, Quantity};
use qcoord::games::{
    analyze, chsh_strategy, classical_value, magic_square_strategy, rates_for_correlation, win_probability, Correlation,
    GameFile, GameSpec,
};
use qcoord::protocols::{
    bell_forwarding_code, converse_audit_cascade, converse_audit_mac, rate_sweep_broadcast, BroadcastProtocolInstance,
    CascadeCode, ConverseAuditReport, MacCode,
};
use qcoord::qla::io::{parse_state, LoadedState};
use qcoord::qla::random::{random_channel, random_pure_state};
use qcoord::qla::{copy_label, DensityOperator, QuantumChannel, SystemLayout};
use qcoord::regions::{
    broadcast_bounds, cascade_bounds, mac_bounds, state_redistribution_bounds, ClassicalQuantumState, CqFile,
    RateBoundReport,
};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::output::Report;
use crate::{AuditArgs, EntropyArgs, Failure, NetworkArg, QuantityArg, RegionArgs, SimulateArgs, SweepArgs};

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn load_state(path: &Path) -> Result<LoadedState, Failure> {
    Ok(parse_state(&read(path)?)?)
}

fn load_ensemble(path: &Path) -> Result<ClassicalQuantumState, Failure> {
    let file: CqFile = serde_json::from_str(&read(path)?)
        .map_err(|e| Failure::Usage(format!("{} is not an ensemble file: {e}", path.display())))?;
    Ok(ClassicalQuantumState::from_file(file)?)
}

fn split_groups(groups: &[String]) -> Vec<Vec<String>> {
    groups.iter().map(|g| g.split(',').map(|l| l.trim().to_string()).filter(|l| !l.is_empty()).collect()).collect()
}

#[derive(Serialize)]
struct EntropyOutput {
    entries: Vec<EntropyReport>,
}

pub fn entropy(args: &EntropyArgs) -> Result<Report, Failure> {
    let rho = load_state(&args.state)?.to_density();
    let entries = match args.quantity {
        Some(q) => {
            let quantity = match q {
                QuantityArg::S => Quantity::S,
                QuantityArg::SCond => Quantity::SCond,
                QuantityArg::I => Quantity::I,
                QuantityArg::ICond => Quantity::ICond,
            };
            vec![EntropyReport::compute(&rho, quantity, split_groups(&args.systems))?]
        }
        None => {
            let labels: Vec<String> = rho.layout().labels().iter().map(|l| l.to_string()).collect();
            let mut out = vec![EntropyReport { quantity: Quantity::S, systems: vec![labels.clone()], value: von_neumann_entropy(&rho) }];
            for l in labels {
                out.push(EntropyReport::compute(&rho, Quantity::S, vec![vec![l]])?);
            }
            out
        }
    };
    let mut csv = String::from("quantity,systems,value\n");
    for e in &entries {
        let systems: Vec<String> = e.systems.iter().map(|g| g.join(" ")).collect();
        csv.push_str(&format!("{:?},{},{}\n", e.quantity, systems.join(";"), e.value));
    }
    Report::new("entropy", &EntropyOutput { entries }, csv)
}

#[derive(Serialize)]
struct RegionOutput {
    #[serde(flatten)]
    report: RateBoundReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    rates: Option<BTreeMap<String, f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    contains: Option<bool>,
}

fn region_report(report: RateBoundReport, rates: &[(&str, Option<f64>)]) -> Result<Report, Failure> {
    let given: BTreeMap<String, f64> = rates.iter().filter_map(|(k, v)| v.map(|v| (k.to_string(), v))).collect();
    let (rates, contains) = if given.is_empty() {
        (None, None)
    } else {
        let inside = report.contains(&given);
        (Some(given), Some(inside))
    };
    let mut csv = String::from("name,expression,value\n");
    for b in &report.bounds {
        csv.push_str(&format!("{},{},{}\n", b.name, b.expression, b.value));
    }
    Report::new("region", &RegionOutput { report, rates, contains }, csv)
}

fn two_sender_rates(a: &RegionArgs) -> [(&'static str, Option<f64>); 4] {
    [("Q1", a.q1), ("E1", a.e1), ("Q2", a.q2), ("E2", a.e2)]
}

pub fn region_cascade(args: &RegionArgs) -> Result<Report, Failure> {
    let omega = load_state(&args.state)?.to_density();
    region_report(cascade_bounds(&omega)?, &two_sender_rates(args))
}

pub fn region_broadcast(args: &RegionArgs) -> Result<Report, Failure> {
    let omega = load_ensemble(&args.state)?;
    region_report(broadcast_bounds(&omega)?, &two_sender_rates(args))
}

pub fn region_mac(args: &RegionArgs) -> Result<Report, Failure> {
    let omega = load_state(&args.state)?.into_pure()?;
    region_report(mac_bounds(&omega)?, &two_sender_rates(args))
}

pub fn region_stateredist(args: &RegionArgs) -> Result<Report, Failure> {
    let psi = load_state(&args.state)?.to_density();
    region_report(state_redistribution_bounds(&psi)?, &[("Q", args.q1), ("E", args.e1)])
}

fn require_seeds(num_seeds: usize) -> Result<(), Failure> {
    if num_seeds == 0 {
        return Err(Failure::Usage("--num-seeds must be at least 1".into()));
    }
    Ok(())
}

pub fn simulate_broadcast(args: &SimulateArgs) -> Result<Report, Failure> {
    require_seeds(args.num_seeds)?;
    let ensemble = load_ensemble(&args.state)?;
    let instance = BroadcastProtocolInstance::new(ensemble, args.n, args.q1, args.q2, args.delta, args.seed)?;
    let report = qcoord::protocols::simulate_broadcast(&instance, args.num_seeds)?;
    let csv = report.to_csv();
    Report::new("simulate", &report, csv)
}

pub fn simulate_mac(args: &SimulateArgs) -> Result<Report, Failure> {
    let omega = load_state(&args.state)?.into_pure()?;
    let report = qcoord::protocols::simulate_mac(&omega, args.n, args.q1, args.q2, args.delta)?;
    let csv = report.to_csv();
    Report::new("simulate", &report, csv)
}

pub fn sweep_broadcast(args: &SweepArgs) -> Result<Report, Failure> {
    require_seeds(args.num_seeds)?;
    let rates: Vec<(f64, f64)> = match (args.q1.len(), args.q2.len()) {
        (_, 1) => args.q1.iter().map(|&q1| (q1, args.q2[0])).collect(),
        (a, b) if a == b => args.q1.iter().copied().zip(args.q2.iter().copied()).collect(),
        (a, b) => return Err(Failure::Usage(format!("--q1 has {a} values but --q2 has {b}"))),
    };
    let ensemble = load_ensemble(&args.state)?;
    let seeds: Vec<u64> = (0..args.num_seeds as u64).map(|k| args.seed.wrapping_add(k)).collect();
    let table = rate_sweep_broadcast(&ensemble, args.delta, &rates, &args.n, &seeds)?;
    let csv = table.to_csv();
    Report::new("sweep", &table, csv)
}

#[derive(Serialize)]
struct GameOutput {
    game: String,
    classical_value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    win_probability: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    required_rates: Option<RateBoundReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    m1_dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    m2_dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    correlation: Option<Vec<Vec<Vec<Vec<f64>>>>>,
}

fn game_report(out: GameOutput) -> Result<Report, Failure> {
    let mut csv = format!("name,value\nclassical_value,{}\n", out.classical_value);
    if let Some(w) = out.win_probability {
        csv.push_str(&format!("win_probability,{w}\n"));
    }
    if let Some(r) = &out.required_rates {
        for b in &r.bounds {
            csv.push_str(&format!("{},{}\n", b.name, b.value));
        }
    }
    Report::new("game", &out, csv)
}

pub fn game_builtin(name: &str) -> Result<Report, Failure> {
    let (game, strategy) = match name {
        "chsh" => (GameSpec::chsh(), chsh_strategy()),
        _ => (GameSpec::magic_square(), magic_square_strategy()),
    };
    let a = analyze(&game, &strategy)?;
    game_report(GameOutput {
        game: name.into(),
        classical_value: a.classical_value,
        win_probability: Some(a.win_probability),
        required_rates: Some(a.required_rates),
        m1_dim: Some(a.m1_dim),
        m2_dim: Some(a.m2_dim),
        correlation: Some(a.correlation),
    })
}

pub fn game_custom(path: &Path) -> Result<Report, Failure> {
    let file: GameFile = serde_json::from_str(&read(path)?)
        .map_err(|e| Failure::Usage(format!("{} is not a game file: {e}", path.display())))?;
    let game = GameSpec::from_file(&file)?;
    let mut out = GameOutput {
        game: "custom".into(),
        classical_value: classical_value(&game)?,
        win_probability: None,
        required_rates: None,
        m1_dim: None,
        m2_dim: None,
        correlation: None,
    };
    if let Some(table) = &file.correlation {
        let corr = Correlation::from_nested(table, game.sizes())?;
        out.win_probability = Some(win_probability(&game, &corr)?);
        out.required_rates = Some(rates_for_correlation(&game, &corr)?);
    }
    game_report(out)
}

#[derive(Serialize)]
struct AuditOutput {
    network: String,
    n: usize,
    pass: bool,
    audits: Vec<SeededAudit>,
}

#[derive(Serialize)]
struct SeededAudit {
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(flatten)]
    report: ConverseAuditReport,
}

fn layout(pairs: &[(String, usize)]) -> Result<SystemLayout, Failure> {
    Ok(SystemLayout::from_pairs(pairs)?)
}

fn copies(label: &str, n: usize, dim: usize) -> Vec<(String, usize)> {
    (0..n).map(|i| (copy_label(label, i), dim)).collect()
}

fn plus(mut v: Vec<(String, usize)>, label: &str, dim: usize) -> Vec<(String, usize)> {
    v.push((label.into(), dim));
    v
}

fn qubits(labels: &[&str]) -> Vec<(String, usize)> {
    labels.iter().map(|l| (l.to_string(), 2)).collect()
}

fn channel(rng: &mut ChaCha8Rng, input: Vec<(String, usize)>, output: Vec<(String, usize)>) -> Result<QuantumChannel, Failure> {
    Ok(random_channel(layout(&input)?, layout(&output)?, 2, rng)?)
}

/// Random cascade code with qubit messages and entanglement, local dimensions from `omega`.
fn random_cascade_code(omega: &DensityOperator, n: usize, seed: u64) -> Result<CascadeCode, Failure> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = |l: &str| omega.layout().dim_of(l);
    let (da, db, dc) = (dim("A")?, dim("B")?, dim("C")?);
    Ok(CascadeCode {
        n,
        alice: channel(&mut rng, plus(copies("Abar", n, da * db * dc), "TA", 2), plus(copies("A", n, da), "M1", 2))?,
        bob: channel(&mut rng, qubits(&["M1", "TB1", "TB2"]), plus(copies("B", n, db), "M2", 2))?,
        charlie: channel(&mut rng, qubits(&["M2", "TC"]), copies("C", n, dc))?,
        psi: random_pure_state(layout(&qubits(&["TA", "TB1"]))?, &mut rng),
        theta: random_pure_state(layout(&qubits(&["TB2", "TC"]))?, &mut rng),
    })
}

fn random_mac_code(omega: &DensityOperator, n: usize, seed: u64) -> Result<MacCode, Failure> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = |l: &str| omega.layout().dim_of(l);
    let (da, db, dc) = (dim("A")?, dim("B")?, dim("C")?);
    Ok(MacCode {
        n,
        alice: channel(&mut rng, copies("A", n, da), plus(copies("A", n, da), "M1", 2))?,
        bob: channel(&mut rng, copies("B", n, db), plus(copies("B", n, db), "M2", 2))?,
        charlie: channel(&mut rng, qubits(&["M1", "M2"]), copies("C", n, dc))?,
    })
}

pub fn audit_converse(args: &AuditArgs) -> Result<Report, Failure> {
    require_seeds(args.num_seeds)?;
    if args.n == 0 {
        return Err(Failure::Usage("--n must be at least 1".into()));
    }
    let seeds: Vec<u64> = (0..args.num_seeds as u64).map(|k| args.seed.wrapping_add(k)).collect();
    let (network, audits) = match (args.network, &args.state) {
        (NetworkArg::Cascade, None) => {
            let (omega, code) = bell_forwarding_code()?;
            ("cascade", vec![SeededAudit { seed: None, report: converse_audit_cascade(&code, &omega)? }])
        }
        (NetworkArg::Mac, None) => return Err(Failure::Usage("the MAC audit needs --state".into())),
        (NetworkArg::Cascade, Some(path)) => {
            let omega = load_state(path)?.to_density();
            let audits = seeds
                .par_iter()
                .map(|&seed| {
                    let code = random_cascade_code(&omega, args.n, seed)?;
                    Ok(SeededAudit { seed: Some(seed), report: converse_audit_cascade(&code, &omega)? })
                })
                .collect::<Result<Vec<_>, Failure>>()?;
            ("cascade", audits)
        }
        (NetworkArg::Mac, Some(path)) => {
            let omega = load_state(path)?.into_pure()?;
            let density = omega.to_density();
            let audits = seeds
                .par_iter()
                .map(|&seed| {
                    let code = random_mac_code(&density, args.n, seed)?;
                    Ok(SeededAudit { seed: Some(seed), report: converse_audit_mac(&code, &omega)? })
                })
                .collect::<Result<Vec<_>, Failure>>()?;
            ("mac", audits)
        }
    };
    let mut csv = String::from("seed,check,kind,lhs,rhs,slack\n");
    for a in &audits {
        let seed = a.seed.map(|s| s.to_string()).unwrap_or_default();
        for c in &a.report.checks {
            csv.push_str(&format!("{seed},\"{}\",{:?},{},{},{}\n", c.name, c.kind, c.lhs, c.rhs, c.slack));
        }
    }
    let pass = audits.iter().all(|a| a.report.pass);
    Report::new("audit", &AuditOutput { network: network.into(), n: args.n, pass, audits }, csv)
}
