use memolab_core::conv_linear::{
    create_filter_matrix, create_upsampling_matrix, interior_indices, linearize_network, spectrum, ConvFilterParams,
    SpectrumReport,
};
use memolab_core::datagen::{generate, sigmoid_compatible, DatasetKind, DatasetSpec};
use memolab_core::dynsys::{
    attractor_census, default_recovery_eps, iterate_many, recovery_curve, recovery_probability, trajectories_csv,
    Classification,
};
use memolab_core::linear_fc::{
    gd_linear_closed_form, gd_linear_with, min_norm_projection, top_eigenvalue, StopRule,
};
use memolab_core::net_engine::{train, Initializer, LayerSpec, Optimizer, TrainConfig, TrainReport};
use memolab_core::nonlinear_fc::{
    adaptive_gd, check_assumption1, phi_eigencheck, phi_span_membership, AdaptiveGdConfig,
};
use memolab_core::numkit::{numerical_rank, orthonormal_basis, svd};
use memolab_core::rng::{gaussian_vec, seeded};
use memolab_core::robustness::{construct_interpolant, interpolant_attractor_check, to_relu_network};
use memolab_core::{Activation, Network, TrainingSet};
use rand::Rng;

use crate::config::{param, Param, Resolved};
use crate::failure::Outcome;
use crate::plot::{render, PlotKind};
use crate::report::{num, Report};

pub struct Scenario {
    pub name: &'static str,
    pub description: &'static str,
    pub params: &'static [Param],
    pub run: fn(&Resolved, &mut Report) -> Outcome<()>,
}

pub const SCENARIOS: [Scenario; 11] = [
    Scenario {
        name: "appendixA-closed-form",
        description: "linear GD iterates against the closed form and the min-norm projector",
        params: &LINEAR_PARAMS,
        run: linear_closed_form,
    },
    Scenario {
        name: "nonlinear-single-layer",
        description: "adaptive-rate GD for a sigmoid layer; rank, phi-eigenvectors and phi-span probes",
        params: &NONLINEAR_PARAMS,
        run: nonlinear_single_layer,
    },
    Scenario {
        name: "swiss-roll-attractors",
        description: "deep FC autoencoder on swiss-roll points; attractor census and grid-probe trajectories",
        params: &SWISS_PARAMS,
        run: swiss_roll_attractors,
    },
    Scenario {
        name: "recovery-sweep",
        description: "recovery probability R_t over iterations and over the recovery radius",
        params: &RECOVERY_PARAMS,
        run: recovery_sweep,
    },
    Scenario {
        name: "table1-rows",
        description: "shallow conv autoencoders on two Gaussian images; spectra show no memorization",
        params: &TABLE1_PARAMS,
        run: table1_rows,
    },
    Scenario {
        name: "table2-rows",
        description: "deep single-filter conv autoencoders on one image; spectra concentrate on one eigenvalue",
        params: &TABLE2_PARAMS,
        run: table2_rows,
    },
    Scenario {
        name: "table2-row1",
        description: "the 2x2, three-layer row of table2-rows with its pass/fail check",
        params: &TABLE2_ROW1_PARAMS,
        run: table2_row1,
    },
    Scenario {
        name: "conv-matrix-golden",
        description: "dumps linearized conv and upsampling matrices and compares them with the worked examples",
        params: &GOLDEN_PARAMS,
        run: conv_matrix_golden,
    },
    Scenario {
        name: "downsample-equivalence",
        description: "strided conv stack to 1x1 versus the fully connected min-norm projector",
        params: &DOWNSAMPLE_PARAMS,
        run: downsample_equivalence,
    },
    Scenario {
        name: "robust-interpolant",
        description: "piecewise-linear interpolant with small loss and attracting training points",
        params: &INTERPOLANT_PARAMS,
        run: robust_interpolant,
    },
    Scenario {
        name: "init-comparison",
        description: "initializers for a linear layer: orthogonal component preservation and singular-value bound",
        params: &INIT_PARAMS,
        run: init_comparison,
    },
];

pub fn find(name: &str) -> Option<&'static Scenario> {
    SCENARIOS.iter().find(|s| s.name == name)
}

fn plot_if(report: &mut Report, cfg: &Resolved, kind: PlotKind, csv_name: &str) -> Outcome<()> {
    if cfg.get::<bool>("analysis", "plots")? {
        let csv = std::fs::read_to_string(report.path(csv_name))?;
        let svg = render(kind, &csv)?;
        let stem = csv_name.trim_end_matches(".csv");
        report.write_file(&format!("{stem}.svg"), &svg)?;
    }
    Ok(())
}

const PLOTS: Param = param("analysis", "plots", "true", "write SVG plots next to the CSVs");

fn optimizer(cfg: &Resolved) -> Outcome<Optimizer> {
    let lr: f64 = cfg.get("optimizer", "lr")?;
    match cfg.raw("optimizer", "kind").0 {
        "gd" => Ok(Optimizer::Gd { lr }),
        "adam" => Ok(Optimizer::adam(lr)),
        other => Err(cfg.reject("optimizer", "kind", format!("unknown optimizer {other:?}; expected gd or adam"))),
    }
}

fn train_config(cfg: &Resolved) -> Outcome<TrainConfig> {
    Ok(TrainConfig::new(optimizer(cfg)?, cfg.get("optimizer", "stop_loss")?, cfg.get("optimizer", "max_steps")?))
}

fn record_training(report: &mut Report, r: &TrainReport) -> Outcome<()> {
    report.record("final_loss", num(r.final_loss));
    report.record("steps", r.steps);
    report.record("converged", r.converged);
    let rows = r.loss_history.iter().enumerate().map(|(k, l)| vec![k.to_string(), num(*l)]);
    report.write_csv("loss.csv", "step,loss", rows)?;
    Ok(())
}

fn write_spectrum(report: &mut Report, name: &str, sp: &SpectrumReport) -> Outcome<()> {
    let rows = sp.magnitudes.iter().enumerate().map(|(k, m)| vec![k.to_string(), num(*m)]);
    report.write_csv(name, "index,magnitude", rows)?;
    Ok(())
}

// ---------------------------------------------------------------- linear

const LINEAR_PARAMS: [Param; 6] = [
    param("dataset", "sets", "20", "number of random training sets"),
    param("dataset", "max_n", "5", "largest example count"),
    param("dataset", "max_d", "12", "largest dimension"),
    param("optimizer", "rate_fraction", "0.9", "gamma = rate_fraction / top covariance eigenvalue"),
    param("optimizer", "steps", "10000", "GD steps compared against the closed form"),
    param("analysis", "limit_steps", "100000000", "step count standing in for t = infinity"),
];

fn linear_closed_form(cfg: &Resolved, report: &mut Report) -> Outcome<()> {
    let sets: usize = cfg.get("dataset", "sets")?;
    let max_n: usize = cfg.get("dataset", "max_n")?;
    let max_d: usize = cfg.get("dataset", "max_d")?;
    if max_n == 0 || max_d < 2 {
        return Err(cfg.reject("dataset", "max_n", "need max_n ≥ 1 and max_d ≥ 2"));
    }
    let fraction: f64 = cfg.get("optimizer", "rate_fraction")?;
    let steps: usize = cfg.get("optimizer", "steps")?;
    let limit_steps: u64 = cfg.get("analysis", "limit_steps")?;
    let mut rng = seeded(report.seed);
    let mut rows = Vec::new();
    let (mut worst_t, mut worst_limit): (f64, f64) = (0.0, 0.0);
    for k in 0..sets {
        let d = rng.random_range(2..=max_d);
        let n = rng.random_range(1..=max_n.min(d));
        let ts = TrainingSet::new((0..n).map(|_| gaussian_vec(&mut rng, d)).collect())?;
        let gamma = fraction / top_eigenvalue(&ts);
        let run = gd_linear_with(&ts, gamma, StopRule::fixed(steps))?;
        let closed = gd_linear_closed_form(&ts, gamma, steps as u64)?;
        let gap = run.weights.sub(&closed)?.frobenius_norm();
        let limit = gd_linear_closed_form(&ts, gamma, limit_steps)?.sub(&min_norm_projection(&ts, 1e-10)?)?.frobenius_norm();
        worst_t = worst_t.max(gap);
        worst_limit = worst_limit.max(limit);
        rows.push(vec![k.to_string(), n.to_string(), d.to_string(), num(gamma), num(gap), num(limit)]);
    }
    report.write_csv("linear_sets.csv", "set,n,d,gamma,iterative_vs_closed_form,limit_vs_projector", rows)?;
    report.record("max_iterative_vs_closed_form", num(worst_t));
    report.record("max_limit_vs_projector", num(worst_limit));
    report.record("closed_form_match", worst_t < 1e-10);
    Ok(())
}

// ---------------------------------------------------------------- nonlinear

const NONLINEAR_PARAMS: [Param; 6] = [
    param("dataset", "n", "2", "examples, drawn uniformly in (0.05, 0.45)"),
    param("dataset", "d", "5", "dimension"),
    param("optimizer", "rate_fraction", "0.5", "gamma as a fraction of the 1/(nLd) limit"),
    param("optimizer", "max_steps", "1000000", "step cap"),
    param("analysis", "probes", "100", "Gaussian probes pushed through the layer"),
    param("analysis", "tol", "1e-4", "phi-eigenvector and phi-span residual tolerance"),
];

fn nonlinear_single_layer(cfg: &Resolved, report: &mut Report) -> Outcome<()> {
    let phi = Activation::Sigmoid;
    let ts = sigmoid_compatible(cfg.get("dataset", "n")?, cfg.get("dataset", "d")?, report.seed)?;
    let assumption = check_assumption1(&ts, phi);
    report.record("assumption_passed", assumption.passed());
    let mut gd = AdaptiveGdConfig::from_data(&ts, phi, cfg.get("optimizer", "rate_fraction")?)?;
    gd.max_steps = cfg.get("optimizer", "max_steps")?;
    report.record("gamma", num(gd.gamma));
    report.record("ratio_bound", num(gd.ratio_bound));
    let run = adaptive_gd(&ts, phi, gd)?;
    report.record("converged", run.converged);
    report.record("steps", run.steps);
    report.record("max_residual", num(run.max_residual));
    report.record("max_preimage_residual", num(run.max_preimage_residual));
    report.record("rank", numerical_rank(&run.weights, 1e-6)?);
    let tol: f64 = cfg.get("analysis", "tol")?;
    for (i, x) in ts.examples().iter().enumerate() {
        let e = phi_eigencheck(&run.weights, phi, x, tol)?;
        report.record(format!("example{i}.phi_eigenvector"), e.is_eigenvector);
        report.record(format!("example{i}.phi_eigenvalue"), num(e.best_scalar));
    }
    let mut rng = seeded(report.seed.wrapping_add(1));
    let (mut worst, mut members) = (0.0f64, 0);
    let probes: usize = cfg.get("analysis", "probes")?;
    for _ in 0..probes {
        let y = phi.apply_vec(&run.weights.mul_vec(&gaussian_vec(&mut rng, ts.dim()))?);
        let m = phi_span_membership(&ts, phi, &y, tol)?;
        worst = worst.max(m.distance);
        members += m.member as usize;
    }
    report.record("probes_in_phi_span", members);
    report.record("max_phi_span_residual", num(worst));
    let rows = run.weights.data().chunks(run.weights.cols()).map(|r| r.iter().map(|v| num(*v)).collect());
    report.write_csv("weights.csv", &(0..ts.dim()).map(|c| format!("c{c}")).collect::<Vec<_>>().join(","), rows)?;
    Ok(())
}

// ---------------------------------------------------------------- attractors

const SWISS_PARAMS: [Param; 16] = [
    param("dataset", "n", "20", "swiss-roll training points in the unit box"),
    param("dataset", "noise", "0", "Gaussian noise added before scaling"),
    param("network", "layers", "7", "fully connected layers"),
    param("network", "width", "128", "hidden width"),
    param("network", "activation", "relu", "hidden activation; the output layer is linear"),
    param("network", "init", "framework_default", "initializer"),
    param("optimizer", "kind", "gd", "gd or adam"),
    param("optimizer", "lr", "0.03", "learning rate"),
    param("optimizer", "stop_loss", "1e-6", "stop once the summed squared error falls below this"),
    param("optimizer", "max_steps", "30000", "step cap"),
    param("analysis", "margin", "0.05", "spectral-radius band around 1 left unclassified"),
    param("analysis", "probe_counts", "5,8,5", "grid points per axis over the unit box"),
    param("analysis", "steps", "2000", "iterations per probe"),
    param("analysis", "record_every", "20", "trajectory CSV stride"),
    param("analysis", "eps_fraction", "0.05", "recovery radius as a fraction of the median pairwise distance"),
    PLOTS,
];

fn fc_autoencoder(cfg: &Resolved, dim: usize) -> Outcome<Network> {
    let layers: usize = cfg.get("network", "layers")?;
    let width: usize = cfg.get("network", "width")?;
    if layers < 2 || width == 0 {
        return Err(cfg.reject("network", "layers", "need at least two layers and a positive width"));
    }
    let act: Activation = cfg.get("network", "activation")?;
    let init: Initializer = cfg.get("network", "init")?;
    let mut specs = vec![LayerSpec::fc(dim, width, act).with_bias()];
    specs.extend((0..layers - 2).map(|_| LayerSpec::fc(width, width, act).with_bias()));
    specs.push(LayerSpec::fc(width, dim, Activation::Identity).with_bias());
    Ok(Network::new(specs, None, init, cfg.seed()?)?)
}

fn swiss_training(cfg: &Resolved, report: &mut Report) -> Outcome<(TrainingSet, Network)> {
    let ts = generate(&DatasetSpec::new(
        DatasetKind::SwissRoll3d { n: cfg.get("dataset", "n")?, noise: cfg.get("dataset", "noise")? },
        report.seed,
    ))?;
    let rows = ts.examples().iter().enumerate().map(|(i, x)| {
        let mut r = vec![i.to_string()];
        r.extend(x.iter().map(|v| num(*v)));
        r
    });
    report.write_csv("train.csv", "train_id,x,y,z", rows)?;
    let net = fc_autoencoder(cfg, ts.dim())?;
    let r = train(&net, &ts, &train_config(cfg)?)?;
    record_training(report, &r)?;
    Ok((ts, r.trained))
}

fn recovery_eps(cfg: &Resolved, ts: &TrainingSet) -> Outcome<f64> {
    let frac: f64 = cfg.get("analysis", "eps_fraction")?;
    Ok(default_recovery_eps(ts)? / memolab_core::dynsys::DEFAULT_EPS_FRACTION * frac)
}

fn swiss_roll_attractors(cfg: &Resolved, report: &mut Report) -> Outcome<()> {
    let (ts, net) = swiss_training(cfg, report)?;
    let census = attractor_census(&net, &ts, cfg.get("analysis", "margin")?)?;
    let count = |c: Classification| census.iter().filter(|r| r.fixed_point && r.classification == c).count();
    report.record("attractors", count(Classification::Attractor));
    report.record("repellers", count(Classification::Repeller));
    report.record("inconclusive", census.len() - count(Classification::Attractor) - count(Classification::Repeller));
    let rows = census.iter().enumerate().map(|(i, c)| {
        vec![i.to_string(), num(c.residual), num(c.top_jacobian_eigenvalue_magnitude), c.classification.to_string()]
    });
    report.write_csv("census.csv", "train_id,residual,spectral_radius,classification", rows)?;

    let counts: Vec<usize> = cfg.list("analysis", "probe_counts")?;
    if counts.len() != ts.dim() {
        return Err(cfg.reject("analysis", "probe_counts", format!("need {} counts", ts.dim())));
    }
    let probes = generate(&DatasetSpec::new(DatasetKind::GridProbes { ranges: vec![(0.0, 1.0); ts.dim()], counts }, 0))?;
    let eps = recovery_eps(cfg, &ts)?;
    let steps: usize = cfg.get("analysis", "steps")?;
    let every: usize = cfg.get::<usize>("analysis", "record_every")?.max(1);
    let trajectories = iterate_many(&net, probes.examples(), steps, &ts, eps)?;
    let landed = trajectories.iter().filter(|t| t.converged_to.is_some()).count();
    report.record("eps_recovery", num(eps));
    report.record("probes", probes.len());
    report.record("probes_landed", landed);
    report.record("probes_landed_fraction", num(landed as f64 / probes.len() as f64));

    let full = trajectories_csv(&trajectories);
    let mut lines = full.lines();
    let mut thinned = format!("{}\n", lines.next().unwrap_or_default());
    for line in lines {
        let step: usize = line.split(',').nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
        if step.is_multiple_of(every) || step == steps {
            thinned.push_str(line);
            thinned.push('\n');
        }
    }
    report.write_file("trajectories.csv", &thinned)?;
    let mut rows = Vec::new();
    for (id, t) in trajectories.iter().enumerate() {
        for (step, p) in t.points.iter().enumerate() {
            if step.is_multiple_of(every) || step + 1 == t.points.len() {
                rows.push(vec![id.to_string(), step.to_string(), num(p[0]), num(p[1 % p.len()])]);
            }
        }
    }
    report.write_csv("trajectory_2d.csv", "start_id,step,x,y", rows)?;
    plot_if(report, cfg, PlotKind::Trajectory2d, "trajectory_2d.csv")
}

const RECOVERY_PARAMS: [Param; 15] = [
    param("dataset", "n", "20", "swiss-roll training points"),
    param("dataset", "noise", "0", "noise before scaling"),
    param("dataset", "test_points", "200", "uniform test starts in the unit box"),
    param("network", "layers", "7", "fully connected layers"),
    param("network", "width", "128", "hidden width"),
    param("network", "activation", "relu", "hidden activation"),
    param("network", "init", "framework_default", "initializer"),
    param("optimizer", "kind", "gd", "gd or adam"),
    param("optimizer", "lr", "0.03", "learning rate"),
    param("optimizer", "stop_loss", "1e-6", "stop loss"),
    param("optimizer", "max_steps", "30000", "step cap"),
    param("analysis", "t_max", "100", "largest iteration count"),
    param("analysis", "eps_fraction", "0.05", "recovery radius as a fraction of the median pairwise distance"),
    param("analysis", "eps_multipliers", "0.25,0.5,1,2,4", "radii swept at t_max, relative to the recovery radius"),
    PLOTS,
];

fn recovery_sweep(cfg: &Resolved, report: &mut Report) -> Outcome<()> {
    let (ts, net) = swiss_training(cfg, report)?;
    let count: usize = cfg.get("dataset", "test_points")?;
    let mut rng = seeded(report.seed.wrapping_add(7));
    let test: Vec<Vec<f64>> = (0..count).map(|_| (0..ts.dim()).map(|_| rng.random::<f64>()).collect()).collect();
    let eps = recovery_eps(cfg, &ts)?;
    let t_max: usize = cfg.get("analysis", "t_max")?;
    let curve = recovery_curve(&net, &ts, &test, eps, t_max)?;
    report.write_csv("recovery.csv", "t,recovery", curve.iter().enumerate().map(|(k, r)| vec![(k + 1).to_string(), num(*r)]))?;
    report.record("eps_recovery", num(eps));
    report.record("recovery_at_t_max", num(curve.last().copied().unwrap_or(0.0)));
    let mults: Vec<f64> = cfg.list("analysis", "eps_multipliers")?;
    let mut by_eps = Vec::new();
    for m in &mults {
        by_eps.push((m * eps, recovery_probability(&net, &ts, &test, m * eps, t_max)?));
    }
    let mut sorted = by_eps.clone();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    report.record("monotone_in_eps", sorted.windows(2).all(|w| w[1].1 >= w[0].1));
    report.write_csv("recovery_eps.csv", "eps,recovery", by_eps.iter().map(|(e, r)| vec![num(*e), num(*r)]))?;
    plot_if(report, cfg, PlotKind::RecoveryCurve, "recovery.csv")
}

// ---------------------------------------------------------------- conv tables

fn conv_stack(s: usize, filters: usize, layers: usize, eps: f64, seed: u64) -> Outcome<Network> {
    let specs = (0..layers)
        .map(|l| {
            let cin = if l == 0 { 1 } else { filters };
            let cout = if l + 1 == layers { 1 } else { filters };
            LayerSpec::conv(cin, cout, s, 1, Activation::Identity)
        })
        .collect();
    Ok(Network::new(specs, None, Initializer::Constant(eps), seed)?)
}

fn conv_row(
    report: &mut Report,
    label: &str,
    ts: &TrainingSet,
    net: &Network,
    tc: &TrainConfig,
    tail: f64,
) -> Outcome<SpectrumReport> {
    let r = train(net, ts, tc)?;
    report.record(format!("{label}.final_loss"), num(r.final_loss));
    report.record(format!("{label}.steps"), r.steps);
    report.record(format!("{label}.converged"), r.converged);
    let sp = spectrum(&linearize_network(&r.trained)?.interior, tail)?;
    report.record(format!("{label}.spectrum"), sp.bracket());
    report.record(format!("{label}.leading_count"), sp.leading.len());
    report.record(format!("{label}.tail_bound"), num(sp.tail_bound));
    write_spectrum(report, &format!("spectrum_{label}.csv"), &sp)?;
    Ok(sp)
}

const TABLE1_PARAMS: [Param; 10] = [
    param("dataset", "side", "3", "image side"),
    param("dataset", "n", "2", "images with standard normal pixels"),
    param("network", "layers", "2", "conv layers"),
    param("network", "filters", "1,16", "filter counts, one row each"),
    param("network", "init_constant", "0.1", "constant initial weight"),
    param("optimizer", "kind", "gd", "gd or adam"),
    param("optimizer", "lr", "0.01", "learning rate"),
    param("optimizer", "stop_loss", "1e-6", "stop loss"),
    param("optimizer", "max_steps", "200000", "step cap"),
    param("analysis", "tail", "1e-2", "magnitudes below this are summarized as a tail"),
];

fn table1_rows(cfg: &Resolved, report: &mut Report) -> Outcome<()> {
    let s: usize = cfg.get("dataset", "side")?;
    let n: usize = cfg.get("dataset", "n")?;
    let mut rng = seeded(report.seed);
    let ts = TrainingSet::new((0..n).map(|_| gaussian_vec(&mut rng, s * s)).collect())?;
    let tc = train_config(cfg)?;
    let layers: usize = cfg.get("network", "layers")?;
    let eps: f64 = cfg.get("network", "init_constant")?;
    for f in cfg.list::<usize>("network", "filters")? {
        let net = conv_stack(s, f, layers, eps, report.seed)?;
        let sp = conv_row(report, &format!("filters{f}"), &ts, &net, &tc, cfg.get("analysis", "tail")?)?;
        if let Some(m) = sp.magnitudes.get(n) {
            report.record(format!("filters{f}.eigenvalue{}", n + 1), num(*m));
        }
    }
    Ok(())
}

const TABLE2_PARAMS: [Param; 8] = [
    param("dataset", "rows", "2:3:0.3,3:9:0.1", "side:layers:init_constant per row"),
    param("dataset", "n", "1", "images per row, Gaussian pixels min-max scaled to [0, 1]"),
    param("optimizer", "kind", "gd", "gd or adam"),
    param("optimizer", "lr", "0.01", "learning rate"),
    param("optimizer", "stop_loss", "1e-6", "stop loss"),
    param("optimizer", "max_steps", "200000", "step cap"),
    param("analysis", "tail", "1e-2", "tail threshold"),
    PLOTS,
];

fn parse_rows(cfg: &Resolved) -> Outcome<Vec<(usize, usize, f64)>> {
    cfg.list::<String>("dataset", "rows")?
        .iter()
        .map(|r| {
            let parts: Vec<&str> = r.split(':').collect();
            let bad = || cfg.reject("dataset", "rows", format!("row {r:?} is not side:layers:init_constant"));
            if parts.len() != 3 {
                return Err(bad());
            }
            Ok((
                parts[0].parse().map_err(|_| bad())?,
                parts[1].parse().map_err(|_| bad())?,
                parts[2].parse().map_err(|_| bad())?,
            ))
        })
        .collect()
}

fn table2_rows(cfg: &Resolved, report: &mut Report) -> Outcome<()> {
    let tc = train_config(cfg)?;
    let tail = cfg.get("analysis", "tail")?;
    let n = cfg.get("dataset", "n")?;
    for (s, layers, eps) in parse_rows(cfg)? {
        let ts = generate(&DatasetSpec::new(DatasetKind::GaussianImages { s, n }, report.seed))?;
        let label = format!("s{s}_L{layers}");
        conv_row(report, &label, &ts, &conv_stack(s, 1, layers, eps, report.seed)?, &tc, tail)?;
        plot_if(report, cfg, PlotKind::SpectrumBars, &format!("spectrum_{label}.csv"))?;
    }
    Ok(())
}

const TABLE2_ROW1_PARAMS: [Param; 8] = [
    param("dataset", "side", "2", "image side"),
    param("network", "layers", "3", "conv layers"),
    param("network", "init_constant", "0.3", "constant initial weight"),
    param("optimizer", "kind", "gd", "gd or adam"),
    param("optimizer", "lr", "0.01", "learning rate"),
    param("optimizer", "stop_loss", "1e-6", "stop loss"),
    param("optimizer", "max_steps", "200000", "step cap"),
    PLOTS,
];

fn table2_row1(cfg: &Resolved, report: &mut Report) -> Outcome<()> {
    let s = cfg.get("dataset", "side")?;
    let ts = generate(&DatasetSpec::new(DatasetKind::GaussianImages { s, n: 1 }, report.seed))?;
    let net = conv_stack(s, 1, cfg.get("network", "layers")?, cfg.get("network", "init_constant")?, report.seed)?;
    let sp = conv_row(report, "row1", &ts, &net, &train_config(cfg)?, 1e-2)?;
    let leading = sp.leading.first().copied().unwrap_or(0.0);
    report.record("leading_eigenvalue", num(leading));
    report.record("tail_bound", num(sp.tail_bound));
    report.record("memorized", sp.leading.len() == 1 && (0.99..=1.01).contains(&leading) && sp.tail_bound < 1e-2);
    std::fs::rename(report.path("spectrum_row1.csv"), report.path("spectrum.csv"))?;
    if let Some(p) = report.files.iter_mut().find(|p| p.ends_with("spectrum_row1.csv")) {
        *p = report.out_dir.join("spectrum.csv");
    }
    plot_if(report, cfg, PlotKind::SpectrumBars, "spectrum.csv")
}

// ---------------------------------------------------------------- golden

const GOLDEN_PARAMS: [Param; 3] = [
    param("dataset", "side", "3", "image side for the filter matrix"),
    param("network", "stride", "1", "filter stride"),
    param("network", "upsample_scale", "2", "scale for the 1x1 upsampling example"),
];

const WORKED_FILTER: [[usize; 9]; 9] = [
    [5, 6, 0, 8, 9, 0, 0, 0, 0],
    [4, 5, 6, 7, 8, 9, 0, 0, 0],
    [0, 4, 5, 0, 7, 8, 0, 0, 0],
    [2, 3, 0, 5, 6, 0, 8, 9, 0],
    [1, 2, 3, 4, 5, 6, 7, 8, 9],
    [0, 1, 2, 0, 4, 5, 0, 7, 8],
    [0, 0, 0, 2, 3, 0, 5, 6, 0],
    [0, 0, 0, 1, 2, 3, 4, 5, 6],
    [0, 0, 0, 0, 1, 2, 0, 4, 5],
];

fn conv_matrix_golden(cfg: &Resolved, report: &mut Report) -> Outcome<()> {
    let s: usize = cfg.get("dataset", "side")?;
    let stride: usize = cfg.get("network", "stride")?;
    let kernel: [f64; 9] = std::array::from_fn(|k| (k + 1) as f64);
    let op = create_filter_matrix(&ConvFilterParams::single(kernel, s, stride)?)?;
    let (matrix, mask) = op.dump();
    report.write_file("filter_matrix.txt", &matrix)?;
    report.write_file("filter_mask.txt", &mask)?;
    let interior = op.interior();
    report.write_file("filter_interior.txt", &interior.to_text())?;
    if s == 3 && stride == 1 {
        let idx = interior_indices(1, 3);
        let source = op.source.clone().unwrap_or_default();
        let cols = op.matrix.cols();
        let matches = idx.iter().enumerate().all(|(r, &pr)| {
            idx.iter().enumerate().all(|(c, &pc)| source[pr * cols + pc].map_or(0, |k| k + 1) == WORKED_FILTER[r][c])
        });
        report.record("filter_matches_worked_example", matches);
    }
    let scale: usize = cfg.get("network", "upsample_scale")?;
    let up = create_upsampling_matrix(1, 1, scale)?;
    report.write_file("upsampling_matrix.txt", &up.dump().0)?;
    if scale == 2 {
        let ones = [5usize, 6, 9, 10];
        let m = &up.matrix;
        let matches = m.shape() == (16, 9)
            && (0..16).all(|r| (0..9).all(|c| m[(r, c)] == if c == 4 && ones.contains(&r) { 1.0 } else { 0.0 }));
        report.record("upsampling_matches_worked_example", matches);
    }
    report.record("filter_forced_zeros", op.mask.iter().filter(|m| !**m).count());
    Ok(())
}

// ---------------------------------------------------------------- downsampling

const DOWNSAMPLE_PARAMS: [Param; 9] = [
    param("dataset", "n", "2", "4x4 images with standard normal pixels"),
    param("network", "filters", "4", "channels in the hidden conv layers"),
    param("network", "init_scale", "0.3", "multiplier on the Xavier-uniform initialization"),
    param("optimizer", "kind", "adam", "gd or adam"),
    param("optimizer", "lr", "1e-3", "learning rate"),
    param("optimizer", "stop_loss", "1e-12", "stop loss"),
    param("optimizer", "max_steps", "60000", "step cap"),
    param("analysis", "tail", "1e-2", "tail threshold"),
    PLOTS,
];

fn downsample_equivalence(cfg: &Resolved, report: &mut Report) -> Outcome<()> {
    let f: usize = cfg.get("network", "filters")?;
    let id = Activation::Identity;
    let layers = vec![
        LayerSpec::conv(1, f, 4, 2, id),
        LayerSpec::conv(f, f, 2, 2, id),
        LayerSpec::upsample(f, 1, 2),
        LayerSpec::conv(f, f, 2, 1, id),
        LayerSpec::upsample(f, 2, 2),
        LayerSpec::conv(f, 1, 4, 1, id),
    ];
    let mut net = Network::new(layers, None, Initializer::XavierUniform, report.seed)?;
    let scale: f64 = cfg.get("network", "init_scale")?;
    net.set_params(net.params().iter().map(|v| scale * v).collect())?;
    let mut rng = seeded(report.seed.wrapping_add(100));
    let n: usize = cfg.get("dataset", "n")?;
    let ts = TrainingSet::new((0..n).map(|_| gaussian_vec(&mut rng, 16)).collect())?;
    let r = train(&net, &ts, &train_config(cfg)?)?;
    record_training(report, &r)?;
    let op = linearize_network(&r.trained)?.interior;
    let proj = min_norm_projection(&ts, 1e-10)?;
    report.record("distance_to_projector", num(op.sub(&proj)?.frobenius_norm()));
    let sp = spectrum(&op, cfg.get("analysis", "tail")?)?;
    report.record("spectrum", sp.bracket());
    write_spectrum(report, "spectrum.csv", &sp)?;
    report.write_file("operator.txt", &op.to_text())?;
    plot_if(report, cfg, PlotKind::SpectrumBars, "spectrum.csv")
}

// ---------------------------------------------------------------- robustness

const INTERPOLANT_PARAMS: [Param; 6] = [
    param("dataset", "points", "0.2,0.45,0.8", "training points in (0, 1)"),
    param("analysis", "epsilon", "0.05", "target reconstruction error"),
    param("analysis", "grid", "10000", "grid intervals for the CSV and the network check"),
    param("analysis", "panels", "100000", "quadrature panels"),
    param("analysis", "starts", "200", "informational; the attractor check uses a fixed start count"),
    PLOTS,
];

fn robust_interpolant(cfg: &Resolved, report: &mut Report) -> Outcome<()> {
    let points: Vec<f64> = cfg.list("dataset", "points")?;
    let eps: f64 = cfg.get("analysis", "epsilon")?;
    let f = construct_interpolant(&points, eps)?;
    report.record("delta", num(f.delta));
    report.record("epsilon_used", num(f.epsilon));
    report.record("training_slope", num(f.a));
    let panels: usize = cfg.get("analysis", "panels")?;
    report.record("expected_squared_error", num(f.expected_squared_error(panels)));
    report.record("expected_abs_error", num(f.expected_abs_error(panels)));
    let grid: usize = cfg.get("analysis", "grid")?;
    report.record("max_deviation", num(f.max_deviation(0.0, 1.0, grid)));
    let check = interpolant_attractor_check(&f, report.seed);
    report.record("left_slope", num(check.left_slope));
    report.record("right_slope", num(check.right_slope));
    for (i, g) in check.gap_slopes.iter().enumerate() {
        report.record(format!("gap{i}.slope"), num(*g));
    }
    for (i, p) in check.points.iter().enumerate() {
        report.record(format!("point{i}.attractor"), p.attractor);
    }
    report.record("starts_converged", format!("{}/{}", check.converged, check.starts));
    let net = to_relu_network(std::slice::from_ref(&f))?;
    report.record("relu_hidden_units", net.layers()[0].output_len());
    let mut worst: f64 = 0.0;
    for k in 0..=grid {
        let x = k as f64 / grid as f64;
        worst = worst.max((net.forward(&[x])?[0] - f.eval(x)).abs());
    }
    report.record("max_network_vs_formula", num(worst));
    report.write_file("interpolant.csv", &f.to_csv(grid))?;
    plot_if(report, cfg, PlotKind::Interpolant, "interpolant.csv")
}

// ---------------------------------------------------------------- initialization

const INIT_PARAMS: [Param; 7] = [
    param("dataset", "n", "3", "Gaussian examples"),
    param("dataset", "d", "8", "dimension"),
    param("network", "inits", "zeros,constant:0.01,xavier_uniform,xavier_normal,kaiming_uniform,kaiming_normal,framework_default", "initializers compared"),
    param("optimizer", "rate_fraction", "0.9", "gamma as a fraction of 1 / top covariance eigenvalue"),
    param("optimizer", "steps", "20000", "GD steps on the linear layer"),
    param("analysis", "probes", "5", "directions orthogonal to the data span"),
    param("analysis", "tol", "1e-10", "preservation tolerance"),
];

fn init_comparison(cfg: &Resolved, report: &mut Report) -> Outcome<()> {
    let (n, d): (usize, usize) = (cfg.get("dataset", "n")?, cfg.get("dataset", "d")?);
    let mut rng = seeded(report.seed);
    let ts = TrainingSet::new((0..n).map(|_| gaussian_vec(&mut rng, d)).collect())?;
    let span = orthonormal_basis(ts.examples(), 1e-10);
    let complement = |mut v: Vec<f64>| {
        for b in &span {
            let p: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(vi, bi)| *vi -= p * bi);
        }
        v
    };
    let probes: Vec<Vec<f64>> = (0..cfg.get::<usize>("analysis", "probes")?).map(|_| complement(gaussian_vec(&mut rng, d))).collect();
    let proj = min_norm_projection(&ts, 1e-10)?;
    let sp = svd(&proj)?.singular_values;
    let gamma = cfg.get::<f64>("optimizer", "rate_fraction")? / top_eigenvalue(&ts);
    let steps: usize = cfg.get("optimizer", "steps")?;
    let tol: f64 = cfg.get("analysis", "tol")?;
    let mut rows = Vec::new();
    for name in cfg.list::<String>("network", "inits")? {
        let init: Initializer = name.parse().map_err(|e| cfg.reject("network", "inits", format!("{e}")))?;
        let net = Network::new(vec![LayerSpec::fc(d, d, Activation::Identity)], None, init, report.seed)?;
        let a0 = net.fc_weights(0)?;
        let a = memolab_core::linear_fc::gd_linear_from(&ts, &a0, gamma, steps)?;
        let drift = probes
            .iter()
            .map(|w| -> Outcome<f64> {
                let (x, y) = (a.mul_vec(w)?, a0.mul_vec(w)?);
                Ok(x.iter().zip(&y).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max))
            })
            .collect::<Outcome<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        let s1 = svd(&a0)?.singular_values[0];
        let sa = svd(&a)?.singular_values;
        let bound = sa.iter().zip(&sp).all(|(x, p)| *x <= p + s1 + 1e-8);
        let dist = a.sub(&proj)?.frobenius_norm();
        report.record(format!("{name}.orthogonal_drift"), num(drift));
        report.record(format!("{name}.preserved"), drift < tol);
        report.record(format!("{name}.distance_to_projector"), num(dist));
        report.record(format!("{name}.singular_value_bound"), bound);
        rows.push(vec![name.clone(), num(s1), num(drift), num(dist), bound.to_string()]);
    }
    report.write_csv("init_comparison.csv", "initializer,init_top_singular_value,orthogonal_drift,distance_to_projector,singular_value_bound", rows)?;
    Ok(())
}
