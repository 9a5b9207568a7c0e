use crate::kps::{self, nums, parse_num, parse_nums, FieldJson, KpsSystem};
use crate::{CliError, ModelSrc, Scenario};
use nlbt::energy::EnergyCoeffs;
use nlbt::models::{self, Model};
use nlbt::pipeline::{self, loglog_slope, memory_estimate, timed_pipeline};
use nlbt::realization::{balanced_realization, build_rom, truncate_transform};
use nlbt::sim::{csv_header, csv_rows, l2_error, sampled_l2_error, samples_for_step, simulate as integrate, InputSignal, SimOptions, SimResult};
use nlbt::{NlbtError, PolySystem, PolyVectorField};
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::Write;
use std::path::Path;

type Res<T> = std::result::Result<T, CliError>;

/// A `kps-1` system, optionally with the reduction metadata `reduce` adds.
#[derive(Serialize, Deserialize)]
struct SystemFile {
    #[serde(flatten)]
    system: KpsSystem,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    r: Option<usize>,
    /// `x = T̄_r(z̄_r)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    transform: Option<FieldJson>,
    /// Leading `r` rows of the inverse map `z̄ = P(x)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    x0_map: Option<FieldJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    z0: Option<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
struct Artifact {
    kind: String,
    system: KpsSystem,
    d_transf: usize,
    /// `v_k` for `k = 0..=d_transf + 1`; `v_0`, `v_1` are empty.
    energy_controllability: Vec<Vec<String>>,
    energy_observability: Vec<Vec<String>>,
    /// Coefficients of `σ_i^2(z_i)` in increasing powers, one list per state.
    sigma_sq: Vec<Vec<String>>,
    hankel: Vec<String>,
    condition: String,
    inod: FieldJson,
    tbar: FieldJson,
    pinv: FieldJson,
}

fn write_out(output: Option<&Path>, text: &str) -> Res<()> {
    match output {
        Some(p) => fs::write(p, text)?,
        None => {
            let mut so = std::io::stdout().lock();
            let r = so.write_all(text.as_bytes()).and_then(|_| if text.ends_with('\n') { Ok(()) } else { so.write_all(b"\n") });
            match r {
                // closed downstream pipe (`| head`)
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
                r => r?,
            }
        }
    }
    Ok(())
}

fn read(path: &Path) -> Res<String> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str) -> Res<T> {
    serde_json::from_str(text).map_err(|e| NlbtError::Parse(e.to_string()).into())
}

fn parse_list(s: &str) -> Res<Vec<f64>> {
    Ok(s.split(',').map(|t| parse_num(t)).collect::<nlbt::Result<Vec<f64>>>()?)
}

struct Loaded {
    name: String,
    sys: PolySystem,
    model: Option<Model>,
    file: Option<SystemFile>,
}

fn load(src: &ModelSrc) -> Res<Loaded> {
    match (&src.model, &src.file) {
        (Some(name), _) => {
            let m = if name == "random" {
                models::random_stable_poly(src.n, src.poly_degree, src.seed)?
            } else {
                models::by_name(name, src.taylor_degree)?
            };
            Ok(Loaded { name: name.clone(), sys: m.sys.clone(), model: Some(m), file: None })
        }
        (None, Some(path)) => {
            let f: SystemFile = parse_json(&read(path)?)?;
            let sys = f.system.to_system()?;
            Ok(Loaded { name: path.display().to_string(), sys, model: None, file: Some(f) })
        }
        (None, None) => Err(NlbtError::InvalidArgument("give --model or --file".into()).into()),
    }
}

pub fn models() -> Res<()> {
    let mut text = String::new();
    for name in models::ZOO {
        text.push_str(name);
        text.push('\n');
    }
    text.push_str("random\n");
    write_out(None, &text)
}

pub fn export(src: &ModelSrc, output: Option<&Path>) -> Res<()> {
    let l = load(src)?;
    write_out(output, &kps::to_string(&l.sys))
}

fn energy_json(e: &EnergyCoeffs) -> Vec<Vec<String>> {
    e.v.iter().map(|v| nums(v)).collect()
}

pub fn balance(src: &ModelSrc, degree: usize, output: Option<&Path>) -> Res<()> {
    let l = load(src)?;
    let bal = pipeline::balance(&l.sys, degree)?;
    let art = Artifact {
        kind: "balance".into(),
        system: KpsSystem::from_system(&l.sys),
        d_transf: degree,
        energy_controllability: energy_json(&bal.ec),
        energy_observability: energy_json(&bal.eo),
        sigma_sq: bal.inod.sigma_sq.c.iter().map(|c| nums(c)).collect(),
        hankel: nums(bal.hankel()),
        condition: kps::num(bal.condition()),
        inod: FieldJson::from_field(&bal.inod.t),
        tbar: FieldJson::from_field(&bal.tbar),
        pinv: FieldJson::from_field(&bal.pinv),
    };
    write_out(output, &serde_json::to_string_pretty(&art).expect("serializable"))
}

pub fn reduce(artifact: &Path, r: usize, degree: usize, x0: Option<&str>, output: Option<&Path>) -> Res<()> {
    let art: Artifact = parse_json(&read(artifact)?)?;
    let sys = art.system.to_system()?;
    let tbar = art.tbar.to_field()?;
    let pinv = art.pinv.to_field()?;
    let x0 = match x0 {
        Some(s) => parse_list(s)?,
        None => vec![0.0; sys.n],
    };
    if x0.len() != sys.n {
        return Err(NlbtError::InvalidArgument(format!("x0 has {} entries, the system has {} states", x0.len(), sys.n)).into());
    }
    if r == 0 || r > sys.n {
        return Err(NlbtError::InvalidArgument(format!("reduced order {r} out of range 1..={}", sys.n)).into());
    }
    let full = balanced_realization(&sys, &tbar, degree)?;
    let rom = build_rom(&full, &pinv, r, &x0)?;
    let out = SystemFile {
        system: KpsSystem::from_system(&rom.sys),
        r: Some(r),
        transform: Some(FieldJson::from_field(&truncate_transform(&tbar, r))),
        x0_map: Some(FieldJson::from_field(&pinv.select_rows(r))),
        z0: Some(nums(&rom.z0)),
    };
    write_out(output, &serde_json::to_string_pretty(&out).expect("serializable"))
}

fn input_signal(s: &Scenario, m: usize) -> Res<InputSignal> {
    let parts: Vec<&str> = s.input.split(':').collect();
    let bad = || CliError::Core(NlbtError::InvalidArgument(format!("unknown input '{}'", s.input)));
    match parts.as_slice() {
        ["zero"] => Ok(InputSignal::Zero { m }),
        ["sin", a, f] => Ok(InputSignal::Sinusoid { m, amp: parse_num(a)?, freq: parse_num(f)? }),
        ["noise", sd, hold] => Ok(InputSignal::white_noise(m, s.t_end, parse_num(hold)?, parse_num(sd)?, s.input_seed)),
        _ => Err(bad()),
    }
}

fn sim_options(s: &Scenario) -> Res<SimOptions> {
    if !(s.dt > 0.0 && s.t_end > 0.0) {
        return Err(NlbtError::InvalidArgument("t-end and dt must be positive".into()).into());
    }
    Ok(SimOptions { rtol: s.rtol, atol: s.atol, samples: samples_for_step(s.t_end, s.dt), ..Default::default() })
}

fn run(l: &Loaded, x0: &[f64], s: &Scenario) -> Res<SimResult> {
    if x0.len() != l.sys.n {
        return Err(NlbtError::InvalidArgument(format!("x0 has {} entries, {} has {} states", x0.len(), l.name, l.sys.n)).into());
    }
    let input = input_signal(s, l.sys.m)?;
    let opts = sim_options(s)?;
    let res = match (&l.model, s.exact) {
        (Some(m), true) => integrate(|x, u| m.rhs(x, u), |x| m.output(x), x0, &input, s.t_end, opts),
        _ => integrate(
            |x, u| l.sys.rhs(x, u).as_slice().to_vec(),
            |x| l.sys.eval_h(x).as_slice().to_vec(),
            x0,
            &input,
            s.t_end,
            opts,
        ),
    };
    Ok(res)
}

fn to_csv(res: &SimResult) -> String {
    let n = res.x.first().map_or(0, |v| v.len());
    let p = res.y.first().map_or(0, |v| v.len());
    let m = res.u.first().map_or(0, |v| v.len());
    let mut text = csv_header(n, p, m).join(",");
    text.push('\n');
    for row in csv_rows(res) {
        text.push_str(&row.join(","));
        text.push('\n');
    }
    text
}

pub fn simulate(src: &ModelSrc, s: &Scenario, output: Option<&Path>) -> Res<()> {
    let l = load(src)?;
    let x0 = match (&s.x0, l.file.as_ref().and_then(|f| f.z0.as_ref())) {
        (Some(v), _) => parse_list(v)?,
        (None, Some(z0)) => parse_nums(z0)?,
        (None, None) => vec![0.0; l.sys.n],
    };
    let res = run(&l, &x0, s)?;
    if res.diverged {
        eprintln!("{}", serde_json::json!({ "warning": "diverged", "t": res.t.last() }));
    }
    write_out(output, &to_csv(&res))
}

/// Initial state of a candidate: mapped through its stored inverse when it
/// is a reduced model, otherwise the reference state itself.
fn candidate_x0(f: &SystemFile, x0: &[f64]) -> Res<Vec<f64>> {
    match &f.x0_map {
        Some(map) => {
            let p: PolyVectorField = map.to_field()?;
            if p.nvars != x0.len() {
                return Err(NlbtError::InvalidArgument("x0 does not match the candidate's full-order dimension".into()).into());
            }
            Ok(p.eval(x0).as_slice().to_vec())
        }
        None => Ok(x0.to_vec()),
    }
}

pub fn compare(
    reference: &ModelSrc,
    candidates: &[std::path::PathBuf],
    s: &Scenario,
    csv_dir: Option<&Path>,
    output: Option<&Path>,
) -> Res<()> {
    let l = load(reference)?;
    let x0 = match &s.x0 {
        Some(v) => parse_list(v)?,
        None => vec![0.0; l.sys.n],
    };
    let rres = run(&l, &x0, s)?;
    if let Some(dir) = csv_dir {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("reference.csv"), to_csv(&rres))?;
    }
    let mut rows = vec![];
    for (i, path) in candidates.iter().enumerate() {
        let f: SystemFile = parse_json(&read(path)?)?;
        let sys = f.system.to_system()?;
        let z0 = candidate_x0(&f, &x0)?;
        let cl = Loaded { name: path.display().to_string(), sys, model: None, file: None };
        let cres = run(&cl, &z0, s)?;
        if let Some(dir) = csv_dir {
            fs::write(dir.join(format!("candidate{}.csv", i + 1)), to_csv(&cres))?;
        }
        let complete = !cres.diverged && cres.t.len() == rres.t.len();
        let (sampled, trapz) = if cres.y.first().map(|v| v.len()) != rres.y.first().map(|v| v.len()) {
            return Err(NlbtError::InvalidArgument(format!("{} has a different number of outputs", cl.name)).into());
        } else if complete {
            (sampled_l2_error(&rres.y, &cres.y), l2_error(&rres.y, &cres.y, &rres.t))
        } else {
            let inf = vec![f64::INFINITY; l.sys.p];
            (inf.clone(), inf)
        };
        rows.push(serde_json::json!({
            "candidate": cl.name,
            "diverged": cres.diverged,
            "t_reached": kps::num(*cres.t.last().unwrap_or(&0.0)),
            "l2_sampled": nums(&sampled),
            "l2_trapezoid": nums(&trapz),
        }));
    }
    let summary = serde_json::json!({
        "reference": l.name,
        "reference_diverged": rres.diverged,
        "samples": rres.t.len(),
        "dt": kps::num(s.dt),
        "candidates": rows,
    });
    write_out(output, &serde_json::to_string_pretty(&summary).expect("serializable"))
}

pub fn bench(ns: &str, degree: usize, reps: usize, seed: u64, mem_limit: u128, output: Option<&Path>) -> Res<()> {
    if degree < 2 || reps == 0 {
        return Err(NlbtError::InvalidArgument("bench needs degree >= 2 and reps >= 1".into()).into());
    }
    let ns: Vec<usize> = ns
        .split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|_| NlbtError::Parse(format!("bad dimension '{t}'"))))
        .collect::<nlbt::Result<_>>()?;
    let d = degree - 1;
    for &n in &ns {
        let bytes = memory_estimate(n, d, d);
        if bytes > mem_limit {
            return Err(NlbtError::ResourceRefusal { bytes, limit: mem_limit }.into());
        }
    }
    let mut csv = String::from("n,rep,energy,inod,balance,realization,total\n");
    let mut medians = vec![];
    for &n in &ns {
        let sys = models::random_stable_poly(n, 2, seed)?.sys;
        let mut totals = vec![];
        for rep in 0..reps {
            let st = timed_pipeline(&sys, d, d)?;
            csv.push_str(&format!(
                "{n},{rep},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e}\n",
                st.energy,
                st.inod,
                st.balance,
                st.realization,
                st.total()
            ));
            totals.push(st.total());
        }
        totals.sort_by(|a, b| a.total_cmp(b));
        let mean = totals.iter().sum::<f64>() / reps as f64;
        let var = if reps > 1 { totals.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (reps - 1) as f64 } else { 0.0 };
        eprintln!("n = {n}: median {:.4e} s, std {:.2e} s", totals[reps / 2], var.sqrt());
        medians.push(totals[reps / 2]);
    }
    if ns.len() >= 2 {
        let x: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
        eprintln!("log-log slope {:.3}", loglog_slope(&x, &medians));
    }
    write_out(output, &csv)
}
