use std::collections::BTreeMap;
use std::env;
use std::fs::{self, File};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use decay_core::gamow::{gamow_log_half_life, gamow_log_half_life_approx, geiger_nuttall_fit, GamowInputs};
use decay_core::inverse::{chi_square, parameter_errors};
use decay_core::langevin::{potential_features, summary, RESOLUTION_GUARD};
use decay_core::{
    fit as run_fit, kramers_rate_full, load_dataset, parse_params, simulate_escape, Dataset, DecayClass, FitConfig,
    KramersModel, ParameterSet, PotentialSpec, RadiusVariant, Role, SimConfig, Weighting,
};

use crate::output::{csv_bytes, sha256_hex, sibling, write_atomic, RunManifest};
use crate::{Common, Variant, WeightingArg};

const DATA_DIR_VAR: &str = "DECAY_DATA_DIR";

fn data_dir() -> Option<PathBuf> {
    env::var_os(DATA_DIR_VAR).map(PathBuf::from)
}

fn load_data(source: &str, manifest: &mut RunManifest) -> Result<Dataset> {
    let path = match (source, data_dir()) {
        ("embedded", None) => {
            manifest.input("data", "embedded");
            return Ok(Dataset::embedded());
        }
        ("embedded", Some(dir)) => dir.join("nuclides.csv"),
        (path, _) => PathBuf::from(path),
    };
    manifest.input("data", path.display().to_string());
    let file = File::open(&path).with_context(|| format!("opening {}", path.display()))?;
    load_dataset(file).with_context(|| format!("reading {}", path.display()))
}

fn load_params(source: &str, manifest: &mut RunManifest) -> Result<ParameterSet> {
    let path = match (source, data_dir()) {
        ("zero", _) => {
            manifest.input("params", "zero");
            return Ok(ParameterSet::zero());
        }
        ("table4", None) => {
            let p = ParameterSet::table4();
            manifest.input("params", "table4");
            manifest.params_sha256 = Some(sha256_hex(p.to_file_string().as_bytes()));
            return Ok(p);
        }
        ("table4", Some(dir)) => dir.join("table4.params"),
        (path, _) => PathBuf::from(path),
    };
    let text = fs::read_to_string(&path).with_context(|| format!("opening {}", path.display()))?;
    manifest.input("params", path.display().to_string());
    manifest.params_sha256 = Some(sha256_hex(text.as_bytes()));
    parse_params(&text).with_context(|| format!("reading {}", path.display()))
}

fn model(variant: Variant) -> KramersModel {
    KramersModel::with_radius(match variant {
        Variant::AsPrinted => RadiusVariant::AsPrinted,
        Variant::AMinusAcl => RadiusVariant::DaughterMass,
    })
}

fn variant_name(variant: Variant) -> &'static str {
    match variant {
        Variant::AsPrinted => "as-printed",
        Variant::AMinusAcl => "a-minus-acl",
    }
}

fn finish(mut manifest: RunManifest, outputs: Vec<(PathBuf, Vec<u8>)>) -> Result<()> {
    for (path, bytes) in &outputs {
        write_atomic(path, bytes)?;
        manifest.outputs.push(path.display().to_string());
    }
    manifest.write_beside(&outputs[0].0)?;
    Ok(())
}

fn fmt(v: f64) -> String {
    format!("{v:.6}")
}

pub fn predict(common: &Common, params: &str, out: &Path) -> Result<()> {
    let mut manifest = RunManifest::new("predict");
    manifest.input("variant", variant_name(common.variant));
    let ds = load_data(&common.data, &mut manifest)?;
    let p = load_params(params, &mut manifest)?;
    let m = model(common.variant);

    let mut rows = Vec::with_capacity(ds.len());
    for (i, r) in ds.records.iter().enumerate() {
        let b = m.evaluate(r, &p).with_context(|| format!("row {}", i + 1))?;
        rows.push((i + 1, r, b));
    }
    let main = csv_bytes(
        &[
            "row", "label", "decay_class", "role", "E_TKE_MeV", "Q_MeV", "R_kramers_fm", "mu", "V_coul_MeV",
            "eps_avg_MeV", "lg_T_exp", "lg_T_model", "delta_lg",
        ],
        |w| {
            for (row, r, b) in &rows {
                w.write_record([
                    row.to_string(),
                    r.label(),
                    r.decay_class.as_str().to_string(),
                    r.role.as_str().to_string(),
                    r.e_tke.to_string(),
                    r.q_total.to_string(),
                    fmt(b.r_kramers),
                    fmt(b.mu),
                    fmt(b.v_coul),
                    fmt(b.eps_avg),
                    fmt(r.lg_t_exp()),
                    fmt(b.lg_t_half),
                    fmt(b.lg_t_half - r.lg_t_exp()),
                ])?;
            }
            Ok(())
        },
    )?;
    let mut outputs = vec![(out.to_path_buf(), main)];
    for class in [DecayClass::Alpha, DecayClass::Cluster, DecayClass::SpontaneousFission] {
        let bytes = csv_bytes(&["lg_T_exp", "lg_T_model"], |w| {
            for (_, r, b) in rows.iter().filter(|(_, r, _)| r.decay_class == class) {
                w.write_record([fmt(r.lg_t_exp()), fmt(b.lg_t_half)])?;
            }
            Ok(())
        })?;
        outputs.push((sibling(out, class.as_str(), "csv"), bytes));
    }

    let fit: Vec<f64> = rows
        .iter()
        .filter(|(_, r, _)| r.role == Role::Fit)
        .map(|(_, r, b)| b.lg_t_half - r.lg_t_exp())
        .collect();
    if !fit.is_empty() {
        let rms = (fit.iter().map(|d| d * d).sum::<f64>() / fit.len() as f64).sqrt();
        println!("records = {}", rows.len());
        println!("fit_records = {}", fit.len());
        println!("rms_lg_fit = {rms:.6}");
    }
    finish(manifest, outputs)
}

pub struct FitArgs {
    pub init: String,
    pub weighting: WeightingArg,
    pub reg: f64,
    pub max_iter: usize,
    pub perturb: f64,
    pub seed: u64,
}

pub fn fit(common: &Common, args: &FitArgs, out: &Path) -> Result<()> {
    let mut manifest = RunManifest::new("fit");
    manifest.input("variant", variant_name(common.variant));
    manifest.seed = Some(args.seed);
    let ds = load_data(&common.data, &mut manifest)?;
    let reference = load_params(&args.init, &mut manifest)?;
    if !(args.perturb >= 0.0 && args.perturb.is_finite()) {
        bail!("--perturb must be a non-negative fraction");
    }
    let mut init = reference.clone();
    if args.perturb > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
        for a in init.a.iter_mut() {
            *a *= 1.0 + args.perturb * rng.sample::<f64, _>(StandardNormal);
        }
        manifest.input("perturb", args.perturb.to_string());
    }
    let weighting = match args.weighting {
        WeightingArg::Unit => Weighting::Unit,
        WeightingArg::Sigma => Weighting::ExperimentalLogSigma,
    };
    manifest.input("weighting", format!("{:?}", args.weighting).to_lowercase());
    let config = FitConfig {
        weighting,
        regularization: args.reg,
        a_ref: reference,
        max_iter: args.max_iter,
        ..FitConfig::default()
    };
    let m = model(common.variant);
    let result = run_fit(&m, &ds, &init, &config)?;
    if !result.converged {
        warn!("fit stopped without converging after {} iterations", result.n_iter);
    }
    if let Err(e) = parameter_errors(&result) {
        warn!("parameter errors unavailable: {e}");
    }

    let mut report = String::new();
    for (name, w) in [("unit", Weighting::Unit), ("sigma", Weighting::ExperimentalLogSigma)] {
        let (chi2, _) = chi_square(&m, &ds, &result.params, &w)?;
        report.push_str(&format!("# chi2_{name} = {chi2:.6}\n"));
    }
    report.push_str(&result.report());
    print!("{}", report.lines().take_while(|l| l.starts_with('#')).map(|l| format!("{}\n", &l[2..])).collect::<String>());
    finish(manifest, vec![(out.to_path_buf(), report.into_bytes())])
}

pub fn validate(common: &Common, params: &str, out: &Path) -> Result<()> {
    let mut manifest = RunManifest::new("validate");
    manifest.input("variant", variant_name(common.variant));
    let ds = load_data(&common.data, &mut manifest)?;
    let p = load_params(params, &mut manifest)?;
    let m = model(common.variant);
    let mut rows = Vec::new();
    for (i, r) in ds.records.iter().enumerate().filter(|(_, r)| r.role == Role::Validate) {
        rows.push((i + 1, r, m.lg_t_half(r, &p).with_context(|| format!("row {}", i + 1))?));
    }
    if rows.is_empty() {
        bail!("dataset has no validate records");
    }
    let bytes = csv_bytes(&["row", "label", "Z", "lg_T_exp", "lg_T_model", "delta_lg"], |w| {
        for (row, r, lg) in &rows {
            let delta = lg - r.lg_t_exp();
            println!("{row:>3} {:<14} delta_lg = {delta:+.4}", r.label());
            w.write_record([row.to_string(), r.label(), r.z.to_string(), fmt(r.lg_t_exp()), fmt(*lg), fmt(delta)])?;
        }
        Ok(())
    })?;
    finish(manifest, vec![(out.to_path_buf(), bytes)])
}

pub fn invert(common: &Common, params: &str, out: &Path) -> Result<()> {
    let mut manifest = RunManifest::new("invert");
    manifest.input("variant", variant_name(common.variant));
    let ds = load_data(&common.data, &mut manifest)?;
    let p = load_params(params, &mut manifest)?;
    let m = model(common.variant);
    let mut rows = Vec::new();
    for (i, r) in ds.records.iter().enumerate().filter(|(_, r)| r.role == Role::Predict) {
        let sol = m.solve_etke(r, &p, r.lg_t_exp()).with_context(|| format!("row {}", i + 1))?;
        for w in &sol.warnings {
            warn!("row {} {}: {w}", i + 1, r.label());
        }
        rows.push((i + 1, r, sol));
    }
    if rows.is_empty() {
        bail!("dataset has no predict records");
    }
    let bytes = csv_bytes(
        &["row", "label", "Q_MeV", "lg_T_exp", "E_TKE_MeV", "E_TKE_table_MeV", "n_roots", "roots_MeV"],
        |w| {
            for (row, r, sol) in &rows {
                println!("{row:>3} {:<20} E_TKE = {:.3} MeV", r.label(), sol.e_tke);
                let roots: Vec<String> = sol.roots.iter().map(|e| format!("{e:.4}")).collect();
                w.write_record([
                    row.to_string(),
                    r.label(),
                    r.q_total.to_string(),
                    fmt(r.lg_t_exp()),
                    format!("{:.4}", sol.e_tke),
                    r.e_tke.to_string(),
                    sol.roots.len().to_string(),
                    roots.join(";"),
                ])?;
            }
            Ok(())
        },
    )?;
    finish(manifest, vec![(out.to_path_buf(), bytes)])
}

pub fn compare(common: &Common, params: &str, out: &Path) -> Result<()> {
    let mut manifest = RunManifest::new("compare");
    manifest.input("variant", variant_name(common.variant));
    let ds = load_data(&common.data, &mut manifest)?;
    let p = load_params(params, &mut manifest)?;
    let m = model(common.variant);
    let c = m.constants;

    struct Row<'a> {
        row: usize,
        family: &'a str,
        even_even: bool,
        e: f64,
        exp: f64,
        kramers: f64,
        gamow: Option<f64>,
        approx: Option<f64>,
        x: f64,
    }
    let mut rows = Vec::new();
    for (i, r) in ds.records.iter().enumerate().filter(|(_, r)| r.decay_class == DecayClass::Alpha) {
        let g = GamowInputs::for_record(r, &p, &c)?;
        rows.push(Row {
            row: i + 1,
            family: if r.element.is_empty() { "superheavy" } else { r.element.as_str() },
            even_even: r.z % 2 == 0 && (r.a - r.z) % 2 == 0,
            e: r.e_tke,
            exp: r.lg_t_exp(),
            kramers: m.lg_t_half(r, &p).with_context(|| format!("row {}", i + 1))?,
            gamow: gamow_log_half_life(&g, &c).ok(),
            approx: gamow_log_half_life_approx(&g, &c).ok().map(|e| e.value),
            x: g.x,
        });
    }
    if rows.is_empty() {
        bail!("dataset has no alpha records");
    }
    let opt = |v: Option<f64>| v.map(fmt).unwrap_or_default();
    let main = csv_bytes(
        &["row", "family", "E_TKE_MeV", "x", "lg_T_exp", "lg_T_kramers", "lg_T_gamow", "lg_T_gamow_approx"],
        |w| {
            for r in &rows {
                w.write_record([
                    r.row.to_string(),
                    r.family.to_string(),
                    r.e.to_string(),
                    fmt(r.x),
                    fmt(r.exp),
                    fmt(r.kramers),
                    opt(r.gamow),
                    opt(r.approx),
                ])?;
            }
            Ok(())
        },
    )?;

    let mut families: BTreeMap<&str, Vec<&Row>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.even_even) {
        families.entry(r.family).or_default().push(r);
    }
    let gn = csv_bytes(&["family", "source", "n", "C", "B", "R2"], |w| {
        for (family, members) in &families {
            let sources: [(&str, Box<dyn Fn(&Row) -> Option<f64>>); 3] = [
                ("experiment", Box::new(|r: &Row| Some(r.exp))),
                ("kramers", Box::new(|r: &Row| Some(r.kramers))),
                ("gamow", Box::new(|r: &Row| r.gamow)),
            ];
            for (name, value) in sources {
                let points: Vec<(f64, f64)> = members.iter().filter_map(|r| value(r).map(|v| (r.e, v))).collect();
                let Ok(line) = geiger_nuttall_fit(&points) else { continue };
                if points.len() >= 3 {
                    println!("{family:<10} {name:<10} n = {:>2} R2 = {:.4}", points.len(), line.r_squared);
                }
                w.write_record([
                    family.to_string(),
                    name.to_string(),
                    points.len().to_string(),
                    fmt(line.c),
                    fmt(line.b),
                    fmt(line.r_squared),
                ])?;
            }
        }
        Ok(())
    })?;
    finish(manifest, vec![(out.to_path_buf(), main), (sibling(out, "gn", "csv"), gn)])
}

pub fn simulate(barrier: f64, eps: f64, gamma: f64, traj: usize, seed: u64, out: &Path) -> Result<()> {
    let mut manifest = RunManifest::new("simulate");
    manifest.seed = Some(seed);
    for (k, v) in [("barrier", barrier), ("eps", eps), ("gamma", gamma)] {
        manifest.input(k, v.to_string());
    }
    manifest.input("traj", traj.to_string());
    if !(barrier > 0.0 && eps > 0.0) {
        bail!("--barrier and --eps must be positive");
    }
    let potential = PotentialSpec::cubic_barrier(barrier * eps, 1.0, 1.0)?;
    let f = potential_features(&potential, 1.0)?;
    let analytic = kramers_rate_full(f.delta_u, f.omega_min, f.omega_max, gamma, eps)?;
    for w in &analytic.warnings {
        warn!("{w}");
    }
    let config = SimConfig {
        mass: 1.0,
        gamma,
        eps,
        dt: RESOLUTION_GUARD,
        t_max: 50.0 / analytic.value,
        x_init: f.x_min,
        p_init: 0.0,
        absorb_x: f.x_min + 1.5 * (f.x_max - f.x_min),
        n_traj: traj,
        seed,
    };
    let stats = simulate_escape(&potential, &config)?;
    let block = summary(&stats, analytic.value);
    print!("{block}");
    let mut csv = Vec::new();
    stats.write_csv(&mut csv)?;
    finish(
        manifest,
        vec![(out.to_path_buf(), csv), (sibling(out, "summary", "txt"), block.into_bytes())],
    )
}
