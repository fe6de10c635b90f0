//! One function per subcommand. Each returns a [`CliError`] whose kind picks
//! the exit code.

use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::ops::RangeInclusive;
use std::path::Path;

use rayon::prelude::*;
use rlp_core::hier::write_dendrogram_csv;
use rlp_core::ingest::write_readings;
use rlp_core::rlp::{feature_names, read_rlp_csv, write_rlp_csv};
use rlp_core::som::write_weights_csv;
use rlp_core::synth::{
    generate_population, write_labels, ConsumerClass, Heterogeneity, PopulationSpec, SynthError,
};
use rlp_core::validity::{comparability_issues, evaluate, write_validity_csv};
use rlp_core::{
    extract_all, parse_readings, ClusterError, HolidayCalendar, Partition64, QualityPolicy,
    SeasonConfig, ValidityReport64,
};

use crate::args::{
    ClusterArgs, Command, ExtractArgs, MethodArgs, ReportArgs, SweepArgs, SynthArgs,
};
use crate::method::{parse_linkage, parse_metric, partition_at, prepare, MethodSpec, Prepared};
use crate::{svg, CliError};

pub fn dispatch(
    command: Command,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), CliError> {
    match command {
        Command::Synth(a) => cmd_synth(&a, out),
        Command::Extract(a) => cmd_extract(&a, out, err),
        Command::Cluster(a) => cmd_cluster(&a, out),
        Command::Sweep(a) => cmd_sweep(&a, out, err),
        Command::Report(a) => cmd_report(&a, out),
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Data(format!("{}: {e}", path.display()))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| io_err(path, e))
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| io_err(path, e))
}

fn cluster_error(e: ClusterError) -> CliError {
    match e {
        ClusterError::InvalidK { .. } | ClusterError::Config(_) => CliError::Usage(e.to_string()),
        ClusterError::EmptyCluster(_) | ClusterError::LabelOutOfRange { .. } => {
            CliError::Contract(e.to_string())
        }
        _ => CliError::Data(e.to_string()),
    }
}

fn say(out: &mut dyn Write, text: std::fmt::Arguments<'_>) -> Result<(), CliError> {
    out.write_fmt(text)
        .and_then(|_| out.write_all(b"\n"))
        .map_err(|e| CliError::Data(format!("writing output: {e}")))
}

pub fn cmd_synth(a: &SynthArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let counts = [
        (ConsumerClass::Household, a.households),
        (ConsumerClass::HouseholdFlatSeason, a.households_flat),
        (ConsumerClass::CabinSummerOff, a.cabins_summer_off),
        (ConsumerClass::CabinWinterOff, a.cabins_winter_off),
        (ConsumerClass::Lighting, a.lighting),
        (ConsumerClass::FlatIndustrial, a.industrial),
        (ConsumerClass::NoisePV, a.noise_pv),
    ];
    let mut spec = PopulationSpec::new(a.year, a.seed).with_noise_sd(a.noise_sd);
    for (class, n) in counts {
        spec = spec.with_count(class, n);
    }
    if a.homogeneous {
        spec = spec.with_heterogeneity(Heterogeneity::none());
    }
    let population = generate_population(&spec).map_err(|e| match e {
        SynthError::EmptyPopulation => CliError::Usage(format!(
            "{e}; give at least one of --households, --households-flat, --cabins-summer-off, \
             --cabins-winter-off, --lighting, --industrial, --noise-pv"
        )),
        SynthError::Invalid(_) => CliError::Usage(e.to_string()),
    })?;

    let mut w = create(&a.readings)?;
    write_readings(&mut w, population.iter().map(|m| &m.series))
        .map_err(|e| io_err(&a.readings, e))?;
    let mut w = create(&a.labels)?;
    write_labels(&mut w, &population).map_err(|e| io_err(&a.labels, e))?;

    say(out, format_args!("seed: {}", a.seed))?;
    for (class, n) in counts {
        if n > 0 {
            say(out, format_args!("{class}: {n}"))?;
        }
    }
    say(
        out,
        format_args!("total: {} meters, year {}", population.len(), a.year),
    )
}

pub fn cmd_extract(
    a: &ExtractArgs,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), CliError> {
    let seasons = SeasonConfig::new(a.summer_start, a.summer_end)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let policy = QualityPolicy::new(a.min_days, !a.keep_all_zero)
        .ok_or_else(|| CliError::Usage("--min-days must be at least 1".into()))?;
    let holidays = match &a.holidays {
        Some(p) => HolidayCalendar::from_override_reader(open(p)?).map_err(|e| io_err(p, e))?,
        None => HolidayCalendar::norwegian(),
    };
    let parsed = parse_readings(open(&a.input)?).map_err(|e| io_err(&a.input, e))?;
    for d in &parsed.diagnostics {
        say(err, format_args!("warning: {}: {d}", a.input.display()))?;
    }

    let m = extract_all(&parsed.series, &seasons, &holidays, &policy);
    let mut w = create(&a.out)?;
    write_rlp_csv(&mut w, &m.rows).map_err(|e| io_err(&a.out, e))?;
    if let Some(p) = &a.rejections {
        let mut w = create(p)?;
        let mut csv = csv::Writer::from_writer(&mut w);
        let rows = std::iter::once(["meter_id", "reason"].map(String::from)).chain(
            m.rejected
                .iter()
                .map(|r| [r.meter_id.clone(), r.reason.clone()]),
        );
        for row in rows {
            csv.write_record(&row).map_err(|e| io_err(p, e))?;
        }
        csv.flush().map_err(|e| io_err(p, e))?;
    }
    for r in &m.rejected {
        say(err, format_args!("rejected {}: {}", r.meter_id, r.reason))?;
    }
    say(
        out,
        format_args!(
            "{} patterns written, {} meters rejected",
            m.rows.len(),
            m.rejected.len()
        ),
    )
}

/// Meter ids and pattern rows of an RLP CSV.
pub fn load_rlp(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>), CliError> {
    let rows = read_rlp_csv(open(path)?).map_err(|e| io_err(path, e))?;
    Ok(rows
        .iter()
        .map(|r| (r.meter_id().to_string(), r.values().to_vec()))
        .unzip())
}

pub fn resolve_method(a: &MethodArgs) -> Result<MethodSpec, CliError> {
    if a.method == "hc" {
        let (Some(l), Some(m)) = (&a.linkage, &a.metric) else {
            return Err(CliError::Usage(
                "--method hc needs --linkage and --metric".into(),
            ));
        };
        return MethodSpec::hier(parse_linkage(l)?, parse_metric(m)?);
    }
    if a.linkage.is_some() || a.metric.is_some() {
        return Err(CliError::Usage(
            "--linkage and --metric only apply to --method hc".into(),
        ));
    }
    let spec: MethodSpec = a.method.parse()?;
    Ok(match spec {
        MethodSpec::Som { .. } => MethodSpec::Som {
            rows: a.som_rows,
            cols: a.som_cols,
        },
        other => other,
    })
}

fn write_partition_files(a: &ClusterArgs, ids: &[String], p: &Partition64) -> Result<(), CliError> {
    let mut w = create(&a.assignments)?;
    let fail = |e: io::Error| io_err(&a.assignments, e);
    writeln!(w, "meter_id,cluster").map_err(fail)?;
    for (id, c) in ids.iter().zip(p.assignment()) {
        writeln!(w, "{id},{c}").map_err(fail)?;
    }
    w.flush().map_err(fail)?;

    if let Some(path) = &a.centroids {
        let mut w = create(path)?;
        let fail = |e: io::Error| io_err(path, e);
        writeln!(w, "cluster,{}", feature_names().join(",")).map_err(fail)?;
        for (c, centroid) in p.centroids().iter().enumerate() {
            write!(w, "{c}").map_err(fail)?;
            for v in centroid {
                write!(w, ",{v}").map_err(fail)?;
            }
            writeln!(w).map_err(fail)?;
        }
        w.flush().map_err(fail)?;
    }
    Ok(())
}

pub fn cmd_cluster(a: &ClusterArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let method = resolve_method(&a.method)?;
    if a.k == 0 {
        return Err(CliError::Usage("--k must be at least 1".into()));
    }
    if a.weights.is_some() && !matches!(method, MethodSpec::Som { .. }) {
        return Err(CliError::Usage(
            "--weights only applies to --method som".into(),
        ));
    }
    if a.dendrogram.is_some() && !matches!(method, MethodSpec::Hier(_)) {
        return Err(CliError::Usage(
            "--dendrogram only applies to hierarchical methods".into(),
        ));
    }
    let (ids, data) = load_rlp(&a.rlp)?;
    if data.is_empty() {
        return Err(CliError::Data(format!("{}: no patterns", a.rlp.display())));
    }
    let tag = method.tag();
    let prepared = prepare(&method, &data, a.seed).map_err(cluster_error)?;
    let p = partition_at(&prepared, &tag, &data, a.k, a.seed, a.restarts).map_err(cluster_error)?;
    write_partition_files(a, &ids, &p)?;

    match (&prepared, &a.weights, &a.dendrogram) {
        (Prepared::Som(model), Some(path), _) => {
            write_weights_csv(create(path)?, model).map_err(|e| io_err(path, e))?;
        }
        (Prepared::Hier(d), _, Some(path)) => {
            write_dendrogram_csv(create(path)?, d).map_err(|e| io_err(path, e))?;
        }
        _ => {}
    }
    say(out, format_args!("seed: {}", a.seed))?;
    say(
        out,
        format_args!(
            "{tag}: {} patterns, requested K {}, effective K {}",
            data.len(),
            a.k,
            p.k()
        ),
    )
}

/// Validity rows for every (method, K), ordered by method tag then K, plus
/// warnings for rows whose indices could not be computed. SOM maps and
/// dendrograms are built once per method and cut at every K.
pub fn sweep(
    data: &[Vec<f64>],
    methods: &[MethodSpec],
    ks: RangeInclusive<usize>,
    seed: u64,
    restarts: usize,
) -> Result<(Vec<ValidityReport64>, Vec<String>), CliError> {
    let prepared: Vec<Prepared> = methods
        .par_iter()
        .map(|m| prepare(m, data, seed))
        .collect::<Result<_, _>>()
        .map_err(cluster_error)?;
    let cells: Vec<(usize, usize)> = (0..methods.len())
        .flat_map(|m| ks.clone().map(move |k| (m, k)))
        .collect();

    let rows: Vec<(ValidityReport64, Option<String>)> = cells
        .par_iter()
        .map(|&(m, k)| {
            let tag = methods[m].tag();
            let p =
                partition_at(&prepared[m], &tag, data, k, seed, restarts).map_err(cluster_error)?;
            Ok(match evaluate(data, &p) {
                Ok(r) => (r, None),
                Err(e) => (
                    ValidityReport64 {
                        method_tag: tag.clone(),
                        requested_k: k,
                        effective_k: p.k(),
                        cdi: f64::NAN,
                        mdi: f64::NAN,
                        dbi: f64::NAN,
                        mia: f64::NAN,
                    },
                    Some(format!("{tag} K={k}: {e}")),
                ),
            })
        })
        .collect::<Result<_, CliError>>()?;

    let (mut reports, warnings): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    reports.sort_by(|a, b| (&a.method_tag, a.requested_k).cmp(&(&b.method_tag, b.requested_k)));
    Ok((reports, warnings.into_iter().flatten().collect()))
}

pub fn cmd_sweep(a: &SweepArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let mut methods = Vec::new();
    for name in &a.methods {
        let m = resolve_method(&MethodArgs {
            method: name.trim().to_string(),
            linkage: None,
            metric: None,
            som_rows: a.som_rows,
            som_cols: a.som_cols,
        })?;
        if methods.iter().any(|x: &MethodSpec| x.tag() == m.tag()) {
            return Err(CliError::Usage(format!("method {name} listed twice")));
        }
        methods.push(m);
    }
    if methods.is_empty() {
        return Err(CliError::Usage("no methods given".into()));
    }
    let (_, data) = load_rlp(&a.rlp)?;
    let n = data.len();
    if a.k_min < 2 || a.k_min > a.k_max || a.k_max + 1 > n {
        return Err(CliError::Usage(format!(
            "K range {}..={} must lie within 2..={} for {n} patterns",
            a.k_min,
            a.k_max,
            n.saturating_sub(1)
        )));
    }
    if a.restarts == 0 {
        return Err(CliError::Usage("--restarts must be at least 1".into()));
    }
    let units = a.som_rows * a.som_cols;
    if methods.iter().any(|m| matches!(m, MethodSpec::Som { .. })) && a.k_max > units {
        return Err(CliError::Usage(format!(
            "K up to {} exceeds the {units} SOM units",
            a.k_max
        )));
    }

    let (reports, warnings) = sweep(&data, &methods, a.k_min..=a.k_max, a.seed, a.restarts)?;
    write_validity_csv(create(&a.out)?, &reports).map_err(|e| io_err(&a.out, e))?;
    for w in warnings {
        say(err, format_args!("warning: {w}"))?;
    }
    for issue in comparability_issues(&reports) {
        say(err, format_args!("not comparable: {issue}"))?;
    }
    say(out, format_args!("seed: {}", a.seed))?;
    say(
        out,
        format_args!(
            "{} rows ({} methods, K {}..={})",
            reports.len(),
            methods.len(),
            a.k_min,
            a.k_max
        ),
    )
}

/// Reads `meter_id,cluster` rows.
pub fn load_assignments(path: &Path) -> Result<Vec<(String, usize)>, CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(open(path)?);
    let headers = rdr.headers().map_err(|e| io_err(path, e))?.clone();
    if headers.iter().ne(["meter_id", "cluster"]) {
        return Err(io_err(path, "header must be `meter_id,cluster`"));
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| io_err(path, e))?;
        let c = rec[1]
            .parse::<usize>()
            .map_err(|e| io_err(path, format!("row {}: {e}", i + 2)))?;
        rows.push((rec[0].to_string(), c));
    }
    Ok(rows)
}

pub fn cmd_report(a: &ReportArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let (ids, data) = load_rlp(&a.rlp)?;
    let index: HashMap<&str, usize> = ids
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();
    fs::create_dir_all(&a.out_dir).map_err(|e| io_err(&a.out_dir, e))?;

    let mut table: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    let mut order = Vec::new();
    for path in &a.assignments {
        let rows = load_assignments(path)?;
        if rows.is_empty() {
            return Err(CliError::Usage(format!(
                "{}: no assignments",
                path.display()
            )));
        }
        let missing: Vec<&str> = rows
            .iter()
            .filter(|(id, _)| !index.contains_key(id.as_str()))
            .map(|(id, _)| id.as_str())
            .collect();
        if !missing.is_empty() {
            return Err(io_err(
                path,
                format!("meter ids not in the RLP file: {}", missing.join(", ")),
            ));
        }
        let k = rows.iter().map(|r| r.1).max().unwrap_or(0) + 1;
        let mut members: Vec<Vec<&[f64]>> = vec![Vec::new(); k];
        for (id, c) in &rows {
            members[*c].push(data[index[id.as_str()]].as_slice());
        }
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "assignments".into());
        if table.contains_key(&name) {
            return Err(CliError::Usage(format!(
                "two assignments files are named {name}"
            )));
        }
        let svg_path = a.out_dir.join(format!("{name}.svg"));
        let mut w = create(&svg_path)?;
        svg::write_cluster_panels(&mut w, &name, &members).map_err(|e| io_err(&svg_path, e))?;
        w.flush().map_err(|e| io_err(&svg_path, e))?;
        table.insert(name.clone(), members.iter().map(Vec::len).collect());
        order.push(name);
    }

    let depth = table.values().map(Vec::len).max().unwrap_or(0);
    let cell =
        |name: &String, c: usize| table[name].get(c).map_or(String::new(), |s| s.to_string());
    let sizes_path = a.out_dir.join("sizes.csv");
    let mut w = create(&sizes_path)?;
    let fail = |e: io::Error| io_err(&sizes_path, e);
    writeln!(w, "cluster,{}", order.join(",")).map_err(fail)?;
    for c in 0..depth {
        let cells: Vec<String> = order.iter().map(|n| cell(n, c)).collect();
        writeln!(w, "{c},{}", cells.join(",")).map_err(fail)?;
    }
    w.flush().map_err(fail)?;

    let width = order.iter().map(String::len).max().unwrap_or(0).max(6);
    let mut line = format!("{:>7}", "cluster");
    order
        .iter()
        .for_each(|n| line.push_str(&format!(" {n:>width$}")));
    say(out, format_args!("{line}"))?;
    for c in 0..depth {
        let mut line = format!("{c:>7}");
        order
            .iter()
            .for_each(|n| line.push_str(&format!(" {:>width$}", cell(n, c))));
        say(out, format_args!("{line}"))?;
    }
    Ok(())
}
