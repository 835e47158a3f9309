//! Command-line front end: constants, profile/isoperimetry construction,
//! rearrangement property suites, solver runs and expansion verification.
//!
//! Exit codes: 0 success, 1 verification failure or solver error, 2 bad
//! configuration.

mod scenarios;

use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gamma2::asymptotics::{
    second_order_prediction, verify_expansion_1d, verify_expansion_nd, SweepOpts,
};
use gamma2::config::Config;
use gamma2::error::Error;
use gamma2::isoperimetry::{
    build_modified_profile, solve_volume_function, square_iso_profile,
};
use gamma2::potential::validate_potential;
use gamma2::profile::{compute_csym, compute_cw, solve_profile, solve_tau};
use gamma2::rearrangement::{
    check_contraction, check_truncation, distribution_function, random_smooth_field, rearrange,
    rearranged_energy_pair, GridFunction,
};
use gamma2::solver1d::{
    assemble_energy, build_grid, minimize_localized, recovery_sequence, reference_interface,
    GridOpts, SolveOpts,
};

#[derive(Parser)]
#[command(name = "gamma2", about = "Sharp-interface expansion toolkit for the weighted 1D functional", version)]
struct Cli {
    /// Key-value config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Bundled scenario name (see `--scenario list`).
    #[arg(long, global = true)]
    scenario: Option<String>,
    /// Output directory for report files.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Random seed for property suites.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Relative-gap threshold for verification exit status.
    #[arg(long, global = true)]
    threshold: Option<f64>,
    /// Explicit eps sweep, comma separated and decreasing.
    #[arg(long, global = true)]
    eps_list: Option<String>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Emit the constants record (wells, c_W, c_sym, tau, multiplier limits,
    /// second-order prediction) for the configured potential and interface
    /// data.
    Constants,
    /// Solve the transition profile and export its tabulation and constants.
    Profile,
    /// Build the modified isoperimetric profile and rearranged domain of the
    /// unit square.
    Iso,
    /// Rearrange a grid function (random or from run.field_csv) and report the
    /// energy comparison.
    Rearrange,
    /// One localized minimization at run.eps.
    Minimize,
    /// eps-sweep verification of the second-order expansion.
    Verify,
    /// Rearrangement and profile property suites (seeded, deterministic).
    Suite,
}

fn main() {
    let cli = Cli::parse();
    init_threads();
    let code = match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::Io(_) => 2,
                _ => 1,
            }
        }
    };
    std::process::exit(code);
}

fn init_threads() {
    if let Ok(spec) = std::env::var("GAMMA2_THREADS") {
        if let Ok(n) = spec.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
        }
    }
}

fn load_config(cli: &Cli) -> Result<Config, Error> {
    let mut cfg = match (&cli.scenario, &cli.config) {
        (Some(name), _) if name == "list" => {
            println!("bundled scenarios:");
            for n in scenarios::names() {
                println!("  {n}");
            }
            std::process::exit(0);
        }
        (Some(name), None) => {
            let text = scenarios::lookup(name)
                .ok_or_else(|| Error::Config(format!("unknown scenario '{name}'")))?;
            Config::parse(text)?
        }
        (Some(name), Some(path)) => {
            // scenario as a base, config file overrides
            let text = scenarios::lookup(name)
                .ok_or_else(|| Error::Config(format!("unknown scenario '{name}'")))?;
            let mut cfg = Config::parse(text)?;
            let over = Config::load(path)?;
            // merge: file wins
            let loaded = std::fs::read_to_string(path)?;
            for line in loaded.lines() {
                let line = line.split('#').next().unwrap_or("").trim();
                if let Some((k, v)) = line.split_once('=') {
                    cfg.set(k.trim(), v.trim());
                }
            }
            cfg.base_dir = over.base_dir;
            cfg
        }
        (None, Some(path)) => Config::load(path)?,
        (None, None) => return Err(Error::Config("pass --config FILE or --scenario NAME".into())),
    };
    if let Some(seed) = cli.seed {
        cfg.set("run.seed", seed);
    }
    if let Some(th) = cli.threshold {
        cfg.set("run.threshold", th);
    }
    if let Some(eps) = &cli.eps_list {
        cfg.set("run.eps_list", eps);
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<i32, Error> {
    let cfg = load_config(cli)?;
    std::fs::create_dir_all(&cli.out)?;
    match cli.cmd {
        Cmd::Constants => cmd_constants(&cfg, &cli.out),
        Cmd::Profile => cmd_profile(&cfg, &cli.out),
        Cmd::Iso => cmd_iso(&cfg, &cli.out),
        Cmd::Rearrange => cmd_rearrange(&cfg, &cli.out),
        Cmd::Minimize => cmd_minimize(&cfg, &cli.out),
        Cmd::Verify => cmd_verify(&cfg, &cli.out),
        Cmd::Suite => cmd_suite(&cfg, &cli.out),
    }
}

/// Write atomically: temp file in the same directory, then rename.
fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), Error> {
    let text = serde_json::to_string_pretty(value).expect("serialization cannot fail");
    write_atomic(path, &text)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_constants(cfg: &Config, out: &Path) -> Result<i32, Error> {
    let potential = cfg.potential()?;
    let report = validate_potential(&potential, 400, 1e-9)?;
    if !report.passed() {
        eprintln!("potential failed validation:");
        for c in &report.checks {
            if !c.passed {
                eprintln!("  {}: {}", c.name, c.measured);
            }
        }
        return Err(Error::InvalidPotential("hypothesis check failed".into()));
    }
    let wells = gamma2::potential::well_data(&potential)?;
    let prof = solve_profile(&potential, 40.0, 1e-12)?;
    let cw = compute_cw(&potential, 1e-12);
    let cs = compute_csym(&prof, &potential, 1e-11);
    let n = cfg.usize_or("run.n", 2)? as u32;
    let kappa = cfg.f64_or("run.kappa", 1.0)?;
    let perimeter = cfg.f64_or("run.perimeter", 1.0)?;
    let total_eta = cfg.f64_or("run.total_eta", 1.0)?;
    let tau_u = solve_tau(&prof, &potential, perimeter, perimeter, kappa, n, total_eta)?;
    let lambda_u = 2.0 * cw.value * (n as f64 - 1.0) * kappa / (wells.b - wells.a);
    let prediction = second_order_prediction(&potential, &prof, n, kappa, perimeter, total_eta)?;

    #[derive(serde::Serialize)]
    struct ConstantsRecord {
        potential: String,
        a: f64,
        b: f64,
        c: f64,
        q: f64,
        ell: f64,
        c_w: f64,
        c_w_abs_error: f64,
        c_sym: f64,
        c_sym_abs_error: f64,
        n: u32,
        kappa: f64,
        perimeter: f64,
        tau_u: f64,
        lambda_u: f64,
        lambda_0: f64,
        f2_prediction: gamma2::asymptotics::Prediction,
        validation: gamma2::potential::ValidationReport,
    }
    let record = ConstantsRecord {
        potential: potential.name().to_string(),
        a: wells.a,
        b: wells.b,
        c: wells.c,
        q: wells.q,
        ell: wells.ell,
        c_w: cw.value,
        c_w_abs_error: cw.abs_error,
        c_sym: cs.value,
        c_sym_abs_error: cs.abs_error,
        n,
        kappa,
        perimeter,
        tau_u,
        lambda_u,
        lambda_0: prediction.lambda0,
        f2_prediction: prediction,
        validation: report,
    };
    write_json(&out.join("constants.json"), &record)?;
    println!(
        "c_W = {:.12}  c_sym = {:.3e}  tau_u = {:.9}  F2 = {:.9}",
        cw.value, cs.value, tau_u, prediction.second_order
    );
    Ok(0)
}

fn cmd_profile(cfg: &Config, out: &Path) -> Result<i32, Error> {
    let potential = cfg.potential()?;
    let horizon = cfg.f64_or("run.horizon", 40.0)?;
    let tol = cfg.f64_or("run.profile_tol", 1e-12)?;
    let prof = solve_profile(&potential, horizon, tol)?;
    write_atomic(&out.join("profile.csv"), &prof.to_csv())?;
    println!("wrote {}", out.join("profile.csv").display());
    let consts = gamma2::profile::profile_constants(&prof, &potential, 1e-11);
    #[derive(serde::Serialize)]
    struct ProfileRecord {
        potential: String,
        tab_lo: f64,
        tab_hi: f64,
        support: Option<(f64, f64)>,
        decay: Option<gamma2::profile::DecayData>,
        constants: gamma2::profile::ProfileConstants,
        solver_tol: f64,
    }
    let (lo, hi) = prof.tab_range();
    write_json(
        &out.join("profile.json"),
        &ProfileRecord {
            potential: potential.name().to_string(),
            tab_lo: lo,
            tab_hi: hi,
            support: prof.support,
            decay: prof.decay,
            constants: consts,
            solver_tol: tol,
        },
    )?;
    Ok(0)
}

fn cmd_iso(cfg: &Config, out: &Path) -> Result<i32, Error> {
    let v_m = cfg.f64_or("weight.v_m", 0.4)?;
    let beta = cfg.f64_or("weight.beta", 1.0)?;
    // user-supplied profile table (columns v, I) or the built-in unit square
    let iso = match cfg.get("iso.file") {
        Some(file) => {
            let text = std::fs::read_to_string(cfg.base_dir.join(file))?;
            let mut v = Vec::new();
            let mut i = Vec::new();
            for line in text.lines().skip(1) {
                let cols: Vec<&str> = line.trim().split(',').collect();
                if cols.len() < 2 || line.trim().is_empty() {
                    continue;
                }
                v.push(cols[0].parse().map_err(|e| Error::Config(format!("{e}")))?);
                i.push(cols[1].parse().map_err(|e| Error::Config(format!("{e}")))?);
            }
            gamma2::isoperimetry::IsoProfile::from_table(
                v,
                i,
                cfg.usize_or("iso.n", 2)? as u32,
            )?
        }
        None => square_iso_profile(),
    };
    let istar = build_modified_profile(&iso, v_m, beta, None, None)?;
    let dom = solve_volume_function(&istar, 1e-12)?;
    // profile export: v, I, I*
    let mut csv = String::from("v,iso,istar\n");
    for k in 1..1000 {
        let v = k as f64 / 1000.0;
        csv.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", v, iso.eval(v), istar.eval(v)));
    }
    write_atomic(&out.join("istar.csv"), &csv)?;
    write_atomic(&out.join("domain.csv"), &dom.to_csv(&istar))?;
    println!("wrote {} and {}", out.join("istar.csv").display(), out.join("domain.csv").display());
    #[derive(serde::Serialize)]
    struct IsoRecord {
        v_m: f64,
        beta: f64,
        c0: f64,
        c0_tail: f64,
        delta_tail: f64,
        local_radius: f64,
        half_width: f64,
        kinks: Vec<f64>,
    }
    write_json(
        &out.join("iso.json"),
        &IsoRecord {
            v_m,
            beta,
            c0: istar.c0,
            c0_tail: istar.c0_tail,
            delta_tail: istar.delta_tail,
            local_radius: istar.r,
            half_width: dom.half_width,
            kinks: iso.kinks().to_vec(),
        },
    )?;
    Ok(0)
}

fn cmd_rearrange(cfg: &Config, out: &Path) -> Result<i32, Error> {
    let potential = cfg.potential()?;
    let v_m = cfg.f64_or("weight.v_m", 0.4)?;
    let iso = square_iso_profile();
    let istar = Arc::new(build_modified_profile(&iso, v_m, 1.0, None, None)?);
    let dom = Arc::new(solve_volume_function(istar.as_ref(), 1e-12)?);
    let u = match cfg.get("run.field_csv") {
        Some(file) => {
            let text = std::fs::read_to_string(cfg.base_dir.join(file))?;
            GridFunction::from_csv(&text)?
        }
        None => {
            let seed = cfg.u64_or("run.seed", 1234)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            random_smooth_field(cfg.usize_or("run.grid", 128)?, 6, &mut rng)
        }
    };
    let eps = cfg.f64_or("run.eps", 0.1)?;
    let r = rearrange(&u, dom.clone());
    let istar_eval = {
        let dom = dom.clone();
        let istar = istar.clone();
        move |t: f64| istar.eval(dom.volume(t))
    };
    write_atomic(&out.join("rearranged.csv"), &r.to_csv(istar_eval, 2000))?;
    let pair = rearranged_energy_pair(&u, eps, &potential, &dom, 8, 800);
    write_json(&out.join("rearrange.json"), &pair)?;
    println!(
        "energy pair: 2-D {:.9} vs rearranged {:.9} (slack {:.3e})",
        pair.lhs, pair.rhs, pair.slack
    );
    Ok(if pair.rhs <= pair.lhs + pair.slack { 0 } else { 1 })
}

fn cmd_minimize(cfg: &Config, out: &Path) -> Result<i32, Error> {
    let potential = cfg.potential()?;
    let weight = cfg.weight()?;
    let eps = cfg.f64_or("run.eps", 1e-2)?;
    let m = cfg.f64("run.mass")?;
    let prof = Arc::new(solve_profile(&potential, 40.0, 1e-12)?);
    let t0 = reference_interface(&weight, &potential, m)?;
    let gopts = GridOpts {
        fine_spacing_factor: cfg.f64_or("mesh.fine_spacing_factor", (0.3 * eps.sqrt()).min(0.1))?,
        ..GridOpts::default()
    };
    let grid = Arc::new(build_grid(&weight, t0, eps, &gopts)?);
    let de = assemble_energy(grid.clone(), &weight, &potential, eps)?;
    let rf = recovery_sequence(prof, &potential, &weight, t0, eps, m)?;
    let v_init: Vec<f64> = grid.nodes.iter().map(|&t| rf.eval(t)).collect();
    let opts = SolveOpts {
        tol: cfg.f64_or("solver.tol", 1e-9)?,
        max_iter: cfg.usize_or("solver.max_iter", 120)?,
        delta_loc: cfg.get("solver.delta_loc").map(|_| cfg.f64("solver.delta_loc")).transpose()?,
    };
    let res = minimize_localized(&de, &weight, &potential, m, &v_init, &opts)?;
    write_atomic(&out.join("field.csv"), &res.field.to_csv())?;
    #[derive(serde::Serialize)]
    struct MinimizeRecord {
        eps: f64,
        mass: f64,
        t0: f64,
        lambda_eps: f64,
        lambda_el_average: f64,
        el_residual: f64,
        iterations: usize,
        well_roots: (f64, f64, f64),
        energy: f64,
        energy_bulk: f64,
        energy_grad: f64,
        nodes: usize,
        solver_tol: f64,
    }
    write_json(
        &out.join("minimize.json"),
        &MinimizeRecord {
            eps,
            mass: m,
            t0,
            lambda_eps: res.lambda_eps,
            lambda_el_average: res.lambda_el_average,
            el_residual: res.el_residual,
            iterations: res.iterations,
            well_roots: res.well_roots,
            energy: res.field.energy(),
            energy_bulk: res.field.energy_bulk,
            energy_grad: res.field.energy_grad,
            nodes: grid.nodes.len(),
            solver_tol: opts.tol,
        },
    )?;
    println!(
        "lambda_eps = {:.9} (EL-average {:.9}), residual {:.2e}, {} iterations",
        res.lambda_eps, res.lambda_el_average, res.el_residual, res.iterations
    );
    Ok(0)
}

fn cmd_verify(cfg: &Config, out: &Path) -> Result<i32, Error> {
    let potential = cfg.potential()?;
    let prof = Arc::new(solve_profile(&potential, 40.0, 1e-12)?);
    let eps_list = cfg.eps_list()?;
    let mode = cfg.sweep_mode()?;
    let opts = SweepOpts {
        solver: SolveOpts {
            tol: cfg.f64_or("solver.tol", 1e-9)?,
            max_iter: cfg.usize_or("solver.max_iter", 120)?,
            delta_loc: cfg
                .get("solver.delta_loc")
                .map(|_| cfg.f64("solver.delta_loc"))
                .transpose()?,
        },
        fine_spacing_factor: cfg
            .get("mesh.fine_spacing_factor")
            .map(|_| cfg.f64("mesh.fine_spacing_factor"))
            .transpose()?,
    };

    let report = if cfg.get("weight.kind") == Some("levelset") {
        let set = cfg.canonical_set()?;
        verify_expansion_nd(set, &potential, prof, &eps_list, &opts)?
    } else {
        let weight = cfg.weight()?;
        let m = cfg.f64("run.mass")?;
        verify_expansion_1d(&weight, &potential, prof, m, &eps_list, mode, &opts)?
    };

    write_json(&out.join("expansion.json"), &report)?;
    write_atomic(&out.join("expansion.csv"), &report.to_csv())?;

    for r in &report.records {
        match &r.error {
            None => println!(
                "eps = {:9.3e}  E2 = {:+.8}{}",
                r.eps,
                r.e2,
                r.lambda_eps.map_or(String::new(), |l| format!("  lambda = {l:.8}"))
            ),
            Some(e) => println!("eps = {:9.3e}  failed: {e}", r.eps),
        }
    }
    if report.prediction.second_order.abs() >= 1e-6 {
        println!(
            "extrapolated limit {:+.8} (rate {:.3}), predicted {:+.8}, relative gap {:.3}%",
            report.extrapolation.limit,
            report.extrapolation.rate,
            report.prediction.second_order,
            100.0 * report.relative_gap
        );
    } else {
        println!(
            "extrapolated limit {:+.3e} (rate {:.3}) against a zero prediction \
             (absolute deviation {:.3e})",
            report.extrapolation.limit,
            report.extrapolation.rate,
            (report.extrapolation.limit - report.prediction.second_order).abs()
        );
    }

    // pass criterion: relative gap when the prediction is away from zero, an
    // absolute band otherwise (zero predictions make the relative gap
    // meaningless)
    let pass = if let Some(abs) = cfg.get("run.abs_threshold") {
        let band: f64 = abs.parse().map_err(|e| Error::Config(format!("abs_threshold: {e}")))?;
        report.extrapolation.limit.abs() <= band
    } else if report.prediction.second_order.abs() < 1e-6 {
        (report.extrapolation.limit - report.prediction.second_order).abs()
            <= cfg.f64_or("run.abs_fallback", 1e-2)?
    } else {
        let threshold = cfg.f64_or("run.threshold", 0.05)?;
        report.relative_gap <= threshold
    };
    let any_errors = report.records.iter().any(|r| r.error.is_some());
    Ok(if pass && !any_errors { 0 } else { 1 })
}

fn cmd_suite(cfg: &Config, out: &Path) -> Result<i32, Error> {
    let seed = cfg.u64_or("run.seed", 20240501)?;
    let fields = cfg.usize_or("run.fields", 100)?;
    let grid_n = cfg.usize_or("run.grid", 128)?;
    let potential = cfg.potential().unwrap_or_else(|_| gamma2::potential::Potential::quartic());

    let iso = square_iso_profile();
    let istar = Arc::new(build_modified_profile(&iso, 0.4, 1.0, None, None)?);
    let dom = Arc::new(solve_volume_function(istar.as_ref(), 1e-12)?);

    #[derive(serde::Serialize, Default)]
    struct SuiteReport {
        seed: u64,
        fields: usize,
        grid: usize,
        equimeasurability_checked: usize,
        equimeasurability_violations: usize,
        contraction_checked: usize,
        contraction_violations: usize,
        truncation_checked: usize,
        truncation_violations: usize,
        polya_szego_checked: usize,
        polya_szego_violations: usize,
        profile_monotone_violations: usize,
        profile_first_integral_max: f64,
        shift_linearity_max_defect: f64,
        failing_case_seeds: Vec<u64>,
    }
    let mut rep = SuiteReport { seed, fields, grid: grid_n, ..Default::default() };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut prev: Option<GridFunction> = None;
    for _case in 0..fields {
        let case_seed = rng.gen::<u64>();
        let mut crng = ChaCha8Rng::seed_from_u64(case_seed);
        let u = random_smooth_field(grid_n, 6, &mut crng);
        let mut failed = false;

        // equimeasurability against the distribution function
        let r = rearrange(&u, dom.clone());
        let rho = distribution_function(&u);
        let cell = u.cell_measure();
        for k in 0..20 {
            let s = -1.5 + 3.0 * k as f64 / 19.0;
            let count = r.values().partition_point(|&x| x <= s);
            let eta_measure = (r.values().len() - count) as f64 * cell;
            rep.equimeasurability_checked += 1;
            if (eta_measure - rho.eval(s)).abs() > cell + 1e-15 {
                rep.equimeasurability_violations += 1;
                failed = true;
            }
        }

        // contraction against the previous field
        if let Some(ref p) = prev {
            let (lhs, rhs) = check_contraction(p, &u, &dom);
            rep.contraction_checked += 1;
            if lhs > rhs + 1e-12 {
                rep.contraction_violations += 1;
                failed = true;
            }
        }

        // truncation commutation at random cuts
        let s1 = crng.gen_range(-1.0..0.0);
        let s2 = crng.gen_range(0.0..1.0_f64).max(s1 + 1e-3);
        rep.truncation_checked += 1;
        if !check_truncation(&u, s1, s2, &dom) {
            rep.truncation_violations += 1;
            failed = true;
        }

        // Polya-Szego with the discretization slack
        let pair = rearranged_energy_pair(&u, 0.1, &potential, &dom, 8, 800);
        rep.polya_szego_checked += 1;
        if pair.rhs > pair.lhs + pair.slack {
            rep.polya_szego_violations += 1;
            failed = true;
        }

        if failed {
            rep.failing_case_seeds.push(case_seed);
        }
        prev = Some(u);
    }

    // profile invariants
    let prof = solve_profile(&potential, 40.0, 1e-11)?;
    let (lo, hi) = prof.tab_range();
    let mut prev_z = f64::NEG_INFINITY;
    let mut fi_max = 0.0_f64;
    for k in 0..=4000 {
        let t = lo + (hi - lo) * k as f64 / 4000.0;
        let z = prof.z(t);
        if z < prev_z - 1e-12 {
            rep.profile_monotone_violations += 1;
        }
        prev_z = z;
        fi_max = fi_max.max((prof.dz(t).powi(2) - potential.eval(z)).abs());
    }
    rep.profile_first_integral_max = fi_max;
    let s0 = gamma2::profile::shift_integral(&prof, 0.0);
    let wd = potential.wells();
    let mut shift_defect = 0.0_f64;
    for _ in 0..5 {
        let tau = rng.gen_range(-2.0..2.0);
        let s = gamma2::profile::shift_integral(&prof, tau);
        shift_defect = shift_defect.max((s - (s0 - tau * (wd.b - wd.a))).abs());
    }
    rep.shift_linearity_max_defect = shift_defect;

    write_json(&out.join("suite.json"), &rep)?;
    let violations = rep.equimeasurability_violations
        + rep.contraction_violations
        + rep.truncation_violations
        + rep.polya_szego_violations
        + rep.profile_monotone_violations;
    println!(
        "suite: {} fields on {}^2, {} violations (equi {}, contraction {}, truncation {}, \
         polya-szego {}, profile {})",
        rep.fields,
        rep.grid,
        violations,
        rep.equimeasurability_violations,
        rep.contraction_violations,
        rep.truncation_violations,
        rep.polya_szego_violations,
        rep.profile_monotone_violations,
    );
    let pass = violations == 0 && rep.shift_linearity_max_defect < 1e-8 && fi_max < 1e-9;
    Ok(if pass { 0 } else { 1 })
}
