use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use spatembed::feature_space::{EmbeddedPoint, EmbeddingModel};
use spatembed::features::{compute_all_features, read_features_tsv, write_features_tsv};
use spatembed::graph::{
    build_graph, parse_edge_tsv, parse_geo, parse_links, read_cache, write_cache, write_edge_tsv,
    write_geo_tsv, GeoLabels, GeoRecords, Graph,
};
use spatembed::significance::{
    fit_null_scaling, group_mean_distance, read_null_model_tsv, read_results_tsv, sample_null,
    summarize, write_null_model_tsv, write_null_samples_tsv, write_results_tsv,
    write_summary_tsv, z_score, GroupTestResult, NullSamplingConfig, NullStatistic,
};
use spatembed::synth::{
    gen_er, gen_pref_attach, gen_spatial_gravity, random_group_labels, GravityParams,
};
use spatembed::{FeatureTable64, Level};

use crate::artifacts::*;
use crate::config::{PipelineConfig, Stage, SynthModel};
use crate::error::{PipelineError, Result};
use crate::manifest;

fn require(path: &Path, what: &str) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(PipelineError::missing(path, format!("{what} not found")))
    }
}

fn reader(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| PipelineError::io(path, e))
}

fn writer(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| PipelineError::io(path, e))
}

fn write_with<F>(path: &Path, body: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> spatembed::Result<()>,
{
    let mut w = writer(path)?;
    body(&mut w)?;
    w.flush().map_err(|e| PipelineError::io(path, e))
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> PipelineError + '_ {
    move |e| PipelineError::io(path, e)
}

pub fn run_stage(stage: Stage, cfg: &PipelineConfig) -> Result<()> {
    fs::create_dir_all(&cfg.out).map_err(|e| PipelineError::io(&cfg.out, e))?;
    match stage {
        Stage::Ingest => ingest(cfg),
        Stage::Features => features(cfg),
        Stage::Embed => embed(cfg),
        Stage::Null => null(cfg),
        Stage::Test => test(cfg),
        Stage::Synth => synth(cfg),
        Stage::Report => report(cfg),
    }
}

/// ingest → features → embed → null → test → report, stopping at the first failure.
pub fn run_all(cfg: &PipelineConfig) -> Result<()> {
    match &cfg.geo {
        None => {
            return Err(PipelineError::missing(
                "--geo",
                "group tests need a geolocation file",
            ))
        }
        Some(p) => require(p, "geolocation file")?,
    }
    for stage in [
        Stage::Ingest,
        Stage::Features,
        Stage::Embed,
        Stage::Null,
        Stage::Test,
        Stage::Report,
    ] {
        run_stage(stage, cfg)?;
    }
    Ok(())
}

fn ingest(cfg: &PipelineConfig) -> Result<()> {
    let (input, mut list) = match (&cfg.links, &cfg.edges) {
        (Some(_), Some(_)) => {
            return Err(PipelineError::Usage(
                "give either --links or --edges, not both".into(),
            ))
        }
        (Some(p), None) => {
            require(p, "links file")?;
            (p.clone(), parse_links(reader(p)?, cfg.strict)?)
        }
        (None, Some(p)) => {
            require(p, "edge list")?;
            (p.clone(), parse_edge_tsv(reader(p)?, cfg.strict)?)
        }
        (None, None) => {
            return Err(PipelineError::missing(
                "--links/--edges",
                "no topology input given",
            ))
        }
    };
    let geo = match &cfg.geo {
        Some(p) => {
            require(p, "geolocation file")?;
            Some(parse_geo(reader(p)?, cfg.strict)?)
        }
        None => None,
    };
    let mut geo_only = 0;
    if let Some(recs) = &geo {
        for rec in recs.records.iter().filter(|r| r.country.is_some()) {
            if !list.contains(&rec.name) {
                list.add_node(&rec.name);
                geo_only += 1;
            }
        }
    }
    let graph = build_graph(list)?;
    let labels = geo.as_ref().map(|r| GeoLabels::join(&graph, r));

    write_with(&cfg.artifact(GRAPH_CACHE), |w| write_cache(&graph, w))?;
    write_with(&cfg.artifact(EDGES), |w| write_edge_tsv(&graph, w))?;
    if let Some(labels) = &labels {
        write_with(&cfg.artifact(LABELS), |w| write_geo_tsv(&graph, labels, w))?;
    }
    let info_path = cfg.artifact(INGEST);
    let mut w = writer(&info_path)?;
    let r = graph.report;
    let mut rows: Vec<(&str, usize)> = vec![
        ("nodes", graph.n()),
        ("edges", graph.m()),
        ("isolated_nodes", graph.isolated_count()),
        ("geo_only_nodes", geo_only),
        ("lines", r.lines),
        ("records", r.records),
        ("malformed_lines", r.malformed_lines),
        ("self_pairs_dropped", r.self_pairs_dropped),
        ("duplicate_pairs_dropped", r.duplicate_pairs_dropped),
    ];
    if let (Some(labels), Some(recs)) = (&labels, &geo) {
        let t = labels.tallies();
        rows.extend([
            ("geo_none", t.none),
            ("geo_country_only", t.country_only),
            ("geo_country_and_region", t.country_and_region),
            ("geo_rejected", recs.rejected),
            ("geo_malformed_lines", recs.malformed_lines),
            ("geo_unmatched", labels.unmatched.len()),
        ]);
    }
    for (k, v) in &rows {
        writeln!(w, "{k}\t{v}").map_err(io_err(&info_path))?;
    }
    w.flush().map_err(io_err(&info_path))?;
    println!(
        "ingest: {} nodes, {} edges ({} isolated)",
        graph.n(),
        graph.m(),
        graph.isolated_count()
    );

    let mut inputs: Vec<PathBuf> = vec![input];
    inputs.extend(cfg.geo.clone());
    manifest::append(cfg, Stage::Ingest, &inputs.iter().map(PathBuf::as_path).collect::<Vec<_>>())
}

fn load_graph(cfg: &PipelineConfig) -> Result<Graph> {
    let path = cfg.artifact(GRAPH_CACHE);
    require(&path, "graph cache (run `ingest` first)")?;
    Ok(read_cache(reader(&path)?)?)
}

fn features(cfg: &PipelineConfig) -> Result<()> {
    let graph = load_graph(cfg)?;
    let table = compute_all_features::<f64>(&graph)?;
    write_with(&cfg.artifact(FEATURES), |w| write_features_tsv(&graph, &table, w))?;
    println!(
        "features: {} nodes, mean degree {:.4}, degree std {:.4}",
        table.len(),
        table.stats.mean_degree,
        table.stats.degree_std
    );
    manifest::append(cfg, Stage::Features, &[&cfg.artifact(GRAPH_CACHE)])
}

fn load_features(cfg: &PipelineConfig) -> Result<(Vec<String>, FeatureTable64)> {
    let path = cfg.artifact(FEATURES);
    require(&path, "feature table (run `features` first)")?;
    Ok(read_features_tsv(reader(&path)?)?)
}

/// Joins label rows to feature rows by node name (feature rows are name-sorted).
fn load_labels(cfg: &PipelineConfig, names: &[String]) -> Result<GeoLabels> {
    let path = cfg.artifact(LABELS);
    require(&path, "label table (run `ingest` with --geo)")?;
    let recs: GeoRecords = parse_geo(reader(&path)?, true)?;
    let mut labels = GeoLabels::unlabeled(names.len());
    for rec in recs.records {
        match names.binary_search(&rec.name) {
            Ok(id) => labels.set(id, rec.country, rec.region),
            Err(_) => labels.unmatched.push(rec.name),
        }
    }
    Ok(labels)
}

fn embed(cfg: &PipelineConfig) -> Result<()> {
    let (names, table) = load_features(cfg)?;
    let mut rows = table.vectors();
    let mut inputs = vec![cfg.artifact(FEATURES)];
    if cfg.fit_labeled_only {
        let labels = load_labels(cfg, &names)?;
        rows = rows
            .into_iter()
            .enumerate()
            .filter(|(i, _)| labels.is_labeled(*i))
            .map(|(_, r)| r)
            .collect();
        inputs.push(cfg.artifact(LABELS));
    }
    let model = spatembed::fit_embedding(&rows, cfg.eig_tol)?;
    write_with(&cfg.artifact(MODEL), |w| model.write_text(w))?;
    println!(
        "embed: fitted on {} rows, {} components retained, eigenvalues {:?}",
        rows.len(),
        model.retained,
        model.eigenvalues
    );
    manifest::append(cfg, Stage::Embed, &inputs.iter().map(PathBuf::as_path).collect::<Vec<_>>())
}

fn load_points(cfg: &PipelineConfig) -> Result<(Vec<String>, Vec<EmbeddedPoint<f64>>)> {
    let (names, table) = load_features(cfg)?;
    let path = cfg.artifact(MODEL);
    require(&path, "embedding model (run `embed` first)")?;
    let model = EmbeddingModel::<f64>::read_text(reader(&path)?)?;
    Ok((names, model.transform_all(&table.vectors())))
}

fn null(cfg: &PipelineConfig) -> Result<()> {
    let (names, mut points) = load_points(cfg)?;
    let mut inputs = vec![cfg.artifact(FEATURES), cfg.artifact(MODEL)];
    if cfg.null_labeled_only {
        let labels = load_labels(cfg, &names)?;
        points = points
            .into_iter()
            .enumerate()
            .filter(|(i, _)| labels.is_labeled(*i))
            .map(|(_, p)| p)
            .collect();
        inputs.push(cfg.artifact(LABELS));
    }
    let (sizes, dropped): (Vec<usize>, Vec<usize>) =
        cfg.sizes.iter().partition(|&&n| n <= points.len());
    if !dropped.is_empty() {
        eprintln!(
            "null: skipping set sizes {dropped:?} larger than the {} available nodes",
            points.len()
        );
    }
    let config = NullSamplingConfig {
        set_sizes: sizes,
        sets_per_size: cfg.sets,
        pair_budget: cfg.pair_budget,
        seed: cfg.seed,
        statistic: if cfg.pooled_null {
            NullStatistic::PooledPairs
        } else {
            NullStatistic::SetMeans
        },
    };
    let samples = sample_null(&points, &config)?;
    let model = fit_null_scaling(&samples, cfg.fix_alpha)?;
    write_with(&cfg.artifact(NULL_SAMPLES), |w| write_null_samples_tsv(&samples, w))?;
    write_with(&cfg.artifact(NULL_MODEL), |w| write_null_model_tsv(&model, w))?;
    println!(
        "null: mu_r = {:.6}, sigma_r(N) = {:.4} * N^-{:.4} (log residual {:.4})",
        model.mu_r, model.a, model.alpha, model.fit_residual
    );
    manifest::append(cfg, Stage::Null, &inputs.iter().map(PathBuf::as_path).collect::<Vec<_>>())
}

fn test(cfg: &PipelineConfig) -> Result<()> {
    let null_path = cfg.artifact(NULL_MODEL);
    require(&null_path, "null model (run `null` first)")?;
    let (names, points) = load_points(cfg)?;
    let labels = load_labels(cfg, &names)?;
    let null = read_null_model_tsv::<f64, _>(reader(&null_path)?)?;

    let mut results: Vec<GroupTestResult<f64>> = Vec::new();
    let mut skipped: Vec<(Level, String, usize)> = Vec::new();
    for level in cfg.level.levels() {
        let membership = labels.groups(level);
        if membership.is_empty() {
            eprintln!("test: no {level} labels present, level skipped");
            continue;
        }
        let groups = group_mean_distance(
            &points,
            &membership,
            cfg.pair_budget,
            cfg.seed,
            cfg.min_group_size,
        )?;
        results.extend(
            groups
                .measured
                .iter()
                .map(|(key, n, r)| z_score(&null, level, key, *n, r.mean)),
        );
        skipped.extend(groups.skipped.into_iter().map(|(k, n)| (level, k, n)));
    }
    if results.is_empty() {
        return Err(PipelineError::Usage(
            "no label group large enough to test".into(),
        ));
    }
    write_with(&cfg.artifact(RESULTS), |w| write_results_tsv(&results, w))?;
    let skipped_path = cfg.artifact(SKIPPED);
    let mut w = writer(&skipped_path)?;
    writeln!(w, "#level\tgroup\tn_nodes").map_err(io_err(&skipped_path))?;
    for (level, key, n) in &skipped {
        writeln!(w, "{level}\t{key}\t{n}").map_err(io_err(&skipped_path))?;
    }
    w.flush().map_err(io_err(&skipped_path))?;
    println!(
        "test: {} groups tested, {} significant, {} skipped",
        results.len(),
        results.iter().filter(|r| r.significant).count(),
        skipped.len()
    );
    manifest::append(
        cfg,
        Stage::Test,
        &[
            &cfg.artifact(FEATURES),
            &cfg.artifact(MODEL),
            &null_path,
            &cfg.artifact(LABELS),
        ],
    )
}

fn report(cfg: &PipelineConfig) -> Result<()> {
    let path = cfg.artifact(RESULTS);
    require(&path, "results table (run `test` first)")?;
    let results = read_results_tsv::<f64, _>(reader(&path)?)?;
    let summary_path = cfg.artifact(SUMMARY);
    let mut w = writer(&summary_path)?;
    for level in [Level::Country, Level::Region] {
        let subset: Vec<_> = results.iter().filter(|r| r.level == level).cloned().collect();
        if subset.is_empty() {
            continue;
        }
        let s = summarize(&subset)?;
        write_summary_tsv(&s, level.as_str(), &mut w)?;
        println!(
            "report [{level}]: {} groups, {} significant ({:.1}%), {} with z < -2, {} with z > +2",
            s.groups,
            s.significant,
            100.0 * s.significant as f64 / s.groups as f64,
            s.below,
            s.above
        );
    }
    w.flush().map_err(io_err(&summary_path))?;
    manifest::append(cfg, Stage::Report, &[&path])
}

fn synth(cfg: &PipelineConfig) -> Result<()> {
    let p = &cfg.synth;
    let (graph, labels) = match p.model {
        SynthModel::Gravity => {
            let params = GravityParams::with_random_positions(p.nodes, p.stubs.clone(), p.beta, cfg.seed);
            gen_spatial_gravity(&params)?
        }
        SynthModel::Er | SynthModel::PrefAttach => {
            let graph = if p.model == SynthModel::Er {
                gen_er(p.nodes, p.edge_prob, cfg.seed)?
            } else {
                gen_pref_attach(p.nodes, p.attach, cfg.seed)?
            };
            let labels = random_group_labels(graph.n(), &p.random_groups, cfg.seed ^ 0x5eed)?;
            (graph, labels)
        }
    };
    write_with(&cfg.artifact(SYNTH_EDGES), |w| write_edge_tsv(&graph, w))?;
    write_with(&cfg.artifact(SYNTH_GEO), |w| write_geo_tsv(&graph, &labels, w))?;
    let info_path = cfg.artifact(SYNTH_INFO);
    let mut w = writer(&info_path)?;
    let note = match p.model {
        SynthModel::Gravity => "gravity growth: P(j) ~ (k_j+1)(d+0.01)^-beta; one illustrative instantiation",
        SynthModel::Er => "G(n,p) with disjoint random label groups",
        SynthModel::PrefAttach => "preferential attachment with disjoint random label groups",
    };
    writeln!(w, "model\t{}\nnodes\t{}\nedges\t{}\nnote\t{note}", p.model, graph.n(), graph.m())
        .map_err(io_err(&info_path))?;
    w.flush().map_err(io_err(&info_path))?;
    println!("synth: {} model, {} nodes, {} edges", p.model, graph.n(), graph.m());
    manifest::append(cfg, Stage::Synth, &[])
}

/// Reads the first non-comment value for `key` from a two-column TSV.
pub fn read_kv(path: &Path, key: &str) -> Result<Option<String>> {
    for line in reader(path)?.lines() {
        let line = line.map_err(io_err(path))?;
        if let Some((k, v)) = line.split_once('\t') {
            if k == key {
                return Ok(Some(v.to_string()));
            }
        }
    }
    Ok(None)
}
