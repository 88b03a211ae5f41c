use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use log::{info, warn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use topoconc::analysis::{
    bin_report, correlation_report, metric_column, tds_report, NodeTable, Provenance,
};
use topoconc::atc::{atc_all, diffuse, init_embeddings, EmbeddingMatrix};
use topoconc::concentration::{tc_all_with_index, HopIndex, TcResult};
use topoconc::eval::{
    chi_square_gof, diffusion_predictor, evaluate, expected_metrics_untrained, hypergeometric_pmf,
    link_hits_at_k, simulate_untrained, BiasOracle, MetricReport,
};
use topoconc::graph::{
    load_edge_list, normalize, split_edges, EdgeSplit, Graph, NormalizationMode, SplitType,
};
use topoconc::reweight::{
    run_reweighting, CommonNeighbors, DotProduct, ReweightConfig, ReweightRun,
};
use topoconc::Error;

use crate::config::{PredictorKind, RawConfig, RunConfig};
use crate::error::{CliError, CliResult};

pub const CONFIG_FILE: &str = "config.txt";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Split,
    Tc,
    Atc,
    Eval,
    BiasOracle,
    Correlate,
    Tds,
    Reweight,
    Pipeline,
}

impl Command {
    pub const ALL: [Command; 9] = [
        Command::Split,
        Command::Tc,
        Command::Atc,
        Command::Eval,
        Command::BiasOracle,
        Command::Correlate,
        Command::Tds,
        Command::Reweight,
        Command::Pipeline,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Split => "split",
            Command::Tc => "tc",
            Command::Atc => "atc",
            Command::Eval => "eval",
            Command::BiasOracle => "bias-oracle",
            Command::Correlate => "correlate",
            Command::Tds => "tds",
            Command::Reweight => "reweight",
            Command::Pipeline => "pipeline",
        }
    }

    pub fn about(self) -> &'static str {
        match self {
            Command::Split => "Split edges into train/val/test: train.edges, val.edges, test.edges, labels.csv, split.json",
            Command::Tc => "Exact topological concentration per node and split type: tc.csv",
            Command::Atc => "Approximate concentration from diffused random projections: atc.csv, embeddings.bin",
            Command::Eval => "Node-centric ranking metrics of the diffusion predictor: metrics.csv, metrics.json, link_hits.csv",
            Command::BiasOracle => "Analytic vs Monte-Carlo metrics of an untrained predictor: bias.csv, bias_histogram.csv, bias_gof.json",
            Command::Correlate => "Per-node table and metric/topology correlations: nodes.csv, nodes.manifest.json, correlation.csv, bins.csv",
            Command::Tds => "Validation-minus-test concentration shift: tds.csv, tds.json",
            Command::Reweight => "Concentration-driven reweighting of the message-passing adjacency: reweight_trace.csv, reweighted_adjacency.csv",
            Command::Pipeline => "split, tc, atc, eval, correlate and tds in one run",
        }
    }
}

pub fn worker_count(requested: usize) -> usize {
    if requested > 0 {
        requested
    } else {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    }
}

/// Resolves `raw`, writes the resolved config into the output directory and
/// runs `command` on a dedicated pool.
pub fn run(command: Command, raw: &RawConfig) -> CliResult<()> {
    let cfg = raw.resolve()?;
    let workers = worker_count(cfg.workers);
    let mut resolved = raw.clone();
    resolved.set("workers", &workers.to_string())?;
    resolved.set("output", &cfg.output.display().to_string())?;
    fs::create_dir_all(&cfg.output).map_err(|e| CliError::path(&cfg.output, e))?;
    let session = Session {
        cfg: &cfg,
        out: &cfg.output,
        workers,
    };
    session.write(CONFIG_FILE, |w| {
        Ok(w.write_all(resolved.render().as_bytes())?)
    })?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    info!(
        "{} with {workers} workers into {}",
        command.name(),
        cfg.output.display()
    );
    pool.install(|| session.dispatch(command))
}

struct Session<'a> {
    cfg: &'a RunConfig,
    out: &'a Path,
    workers: usize,
}

/// Intermediates shared between pipeline stages.
struct Prepared {
    graph: Graph,
    split: EdgeSplit,
}

impl Session<'_> {
    fn dispatch(&self, command: Command) -> CliResult<()> {
        if command == Command::BiasOracle {
            return self.bias_oracle();
        }
        let p = self.prepare()?;
        match command {
            Command::Split => self.write_split(&p),
            Command::Tc => {
                self.tc(&p)?;
                Ok(())
            }
            Command::Atc => self.atc(&p).map(drop),
            Command::Eval => {
                let emb = self.diffused(&p.split)?;
                self.eval(&p, &emb).map(drop)
            }
            Command::Correlate => {
                let tc = self.concentration(&p.split)?;
                let emb = self.diffused(&p.split)?;
                let report = self.metrics(&p.split, &emb, self.cfg.eval.truth)?;
                let table = self.table(&p, &tc, Some(&emb), Some(&report))?;
                self.correlate(&table)
            }
            Command::Tds => {
                let tc = self.concentration(&p.split)?;
                let mut table = self.table(&p, &tc, None, None)?;
                if self.cfg.analysis.gap.is_some() {
                    let emb = self.diffused(&p.split)?;
                    self.add_gap(&mut table, &p.split, &emb)?;
                }
                self.tds(&table, &p.graph)
            }
            Command::Reweight => self.reweight(&p),
            Command::Pipeline => self.pipeline(&p),
            Command::BiasOracle => unreachable!(),
        }
    }

    fn pipeline(&self, p: &Prepared) -> CliResult<()> {
        self.write_split(p)?;
        let tc = self.tc(p)?;
        let emb = self.atc(p)?;
        let report = self.eval(p, &emb)?;
        let mut table = self.table(p, &tc, Some(&emb), Some(&report))?;
        if self.cfg.analysis.gap.is_some() {
            self.add_gap(&mut table, &p.split, &emb)?;
        }
        tolerate_undefined("correlate", self.correlate(&table))?;
        tolerate_undefined("tds", self.tds(&table, &p.graph))
    }

    fn write<F>(&self, name: &str, body: F) -> CliResult<()>
    where
        F: FnOnce(&mut BufWriter<File>) -> topoconc::Result<()>,
    {
        let path = self.out.join(name);
        let file = File::create(&path).map_err(|e| CliError::path(&path, e))?;
        let mut w = BufWriter::new(file);
        body(&mut w)?;
        w.flush().map_err(|e| CliError::path(&path, e))?;
        Ok(())
    }

    fn prepare(&self) -> CliResult<Prepared> {
        let input = self
            .cfg
            .input
            .as_ref()
            .ok_or_else(|| CliError::Config("input is required".into()))?;
        let file = File::open(input).map_err(|e| CliError::path(input, e))?;
        let loaded = load_edge_list(BufReader::new(file))?;
        let r = loaded.report;
        info!(
            "loaded {} nodes, {} edges ({} records, {} duplicates, {} self-loops)",
            loaded.graph.node_count(),
            loaded.graph.edge_count(),
            r.records,
            r.duplicates,
            r.self_loops
        );
        let split = split_edges(&loaded.graph, self.cfg.ratios, self.cfg.strategy)?;
        Ok(Prepared {
            graph: loaded.graph,
            split,
        })
    }

    fn write_split(&self, p: &Prepared) -> CliResult<()> {
        #[derive(Serialize)]
        struct Summary {
            nodes: usize,
            train: usize,
            val: usize,
            test: usize,
        }
        for (t, name) in SplitType::ALL
            .iter()
            .zip(["train.edges", "val.edges", "test.edges"])
        {
            self.write(name, |w| {
                for e in p.split.edges(*t) {
                    match e.timestamp {
                        Some(ts) => writeln!(w, "{} {} {ts}", e.u, e.v)?,
                        None => writeln!(w, "{} {}", e.u, e.v)?,
                    }
                }
                Ok(())
            })?;
        }
        self.write("labels.csv", |w| p.graph.write_label_map(w))?;
        let summary = Summary {
            nodes: p.split.node_count(),
            train: p.split.edges(SplitType::Train).len(),
            val: p.split.edges(SplitType::Val).len(),
            test: p.split.edges(SplitType::Test).len(),
        };
        info!(
            "split {} / {} / {}",
            summary.train, summary.val, summary.test
        );
        self.write("split.json", |w| {
            Ok(serde_json::to_writer_pretty(w, &summary)?)
        })
    }

    fn concentration(&self, split: &EdgeSplit) -> CliResult<Vec<Vec<TcResult<f64>>>> {
        let params = self.cfg.tc;
        params.validate()?;
        let index = HopIndex::build(split, params.k)?;
        SplitType::ALL
            .iter()
            .map(|&t| Ok(tc_all_with_index(split, &index, t, params)?))
            .collect()
    }

    fn tc(&self, p: &Prepared) -> CliResult<Vec<Vec<TcResult<f64>>>> {
        let results = self.concentration(&p.split)?;
        self.write("tc.csv", |w| {
            writeln!(w, "node_label,split_type,K,beta,norm,value")?;
            for r in results.iter().flatten() {
                writeln!(
                    w,
                    "{},{},{},{},{},{}",
                    p.graph.label(r.node),
                    r.split_type,
                    r.k,
                    r.beta,
                    r.norm,
                    na(r.value)
                )?;
            }
            Ok(())
        })?;
        Ok(results)
    }

    fn diffused(&self, split: &EdgeSplit) -> CliResult<EmbeddingMatrix<f64>> {
        let a = &self.cfg.atc;
        let adj = normalize::<f64>(split, NormalizationMode::Row);
        let raw = init_embeddings::<f64>(split.node_count(), a.dim, a.seed, a.variance)?;
        Ok(diffuse(&adj, &raw, &a.alpha)?)
    }

    fn atc(&self, p: &Prepared) -> CliResult<EmbeddingMatrix<f64>> {
        let a = &self.cfg.atc;
        let emb = self.diffused(&p.split)?;
        let columns = SplitType::ALL
            .iter()
            .map(|&t| Ok((t, atc_all(&emb, &p.split, t, a.phi)?)))
            .collect::<CliResult<Vec<_>>>()?;
        self.write("atc.csv", |w| {
            writeln!(w, "node_label,split_type,K,beta,norm,value,method")?;
            for (t, values) in &columns {
                for (i, v) in values.iter().enumerate() {
                    writeln!(
                        w,
                        "{},{t},{},{},{},{},atc",
                        p.graph.label(i),
                        a.hops,
                        a.beta,
                        a.phi,
                        na(*v)
                    )?;
                }
            }
            Ok(())
        })?;
        self.write("embeddings.bin", |w| emb.write_binary(w))?;
        Ok(emb)
    }

    fn metrics(
        &self,
        split: &EdgeSplit,
        emb: &EmbeddingMatrix<f64>,
        truth: SplitType,
    ) -> CliResult<MetricReport<f64>> {
        let predictor = diffusion_predictor(emb);
        let e = &self.cfg.eval;
        Ok(evaluate(
            split,
            |i| predictor.score_row(i),
            &e.ks,
            e.exclude_train,
            truth,
        )?)
    }

    fn eval(&self, p: &Prepared, emb: &EmbeddingMatrix<f64>) -> CliResult<MetricReport<f64>> {
        let e = &self.cfg.eval;
        let report = self.metrics(&p.split, emb, e.truth)?;
        info!("evaluated {} nodes", report.full_mrr.len());
        self.write("metrics.csv", |w| report.write_csv(w, p.graph.labels()))?;
        self.write("metrics.json", |w| report.write_aggregate_json(w))?;
        if e.negatives > 0 && p.split.edges(e.truth).is_empty() {
            info!("no {} edges, link-centric hits skipped", e.truth);
        } else if e.negatives > 0 {
            let predictor = diffusion_predictor(emb);
            let negatives = sample_negatives(&p.graph, e.negatives, e.negative_seed)?;
            let neg: Vec<f64> = negatives
                .iter()
                .map(|&(u, v)| predictor.score(u, v))
                .collect();
            let pos: Vec<f64> = p
                .split
                .edges(e.truth)
                .iter()
                .map(|edge| predictor.score(edge.u, edge.v))
                .collect();
            self.write("link_hits.csv", |w| {
                writeln!(w, "K,hits")?;
                for &k in &e.ks {
                    writeln!(w, "{k},{}", link_hits_at_k(&pos, &neg, k)?)?;
                }
                Ok(())
            })?;
        }
        Ok(report)
    }

    fn table(
        &self,
        p: &Prepared,
        tc: &[Vec<TcResult<f64>>],
        emb: Option<&EmbeddingMatrix<f64>>,
        report: Option<&MetricReport<f64>>,
    ) -> CliResult<NodeTable> {
        let mut table = NodeTable::new(p.graph.labels().to_vec());
        for results in tc {
            table.add_concentration(results)?;
        }
        table.add_degrees(&p.split)?;
        table.add_density(&p.split)?;
        if let Some(emb) = emb {
            table.add_atc(emb, &p.split, self.cfg.atc.phi)?;
        }
        if let Some(report) = report {
            let prov = Provenance::new("eval")
                .param("predictor", "diffusion")
                .param("truth", self.cfg.eval.truth.short_name())
                .param("exclude_train", self.cfg.eval.exclude_train)
                .seed(self.cfg.atc.seed);
            table.add_metrics(report, prov)?;
        }
        Ok(table)
    }

    /// `gap` column: the configured metric with validation truth minus the
    /// same metric with test truth.
    fn add_gap(
        &self,
        table: &mut NodeTable,
        split: &EdgeSplit,
        emb: &EmbeddingMatrix<f64>,
    ) -> CliResult<()> {
        let Some(name) = &self.cfg.analysis.gap else {
            return Ok(());
        };
        let mut per_split = Vec::new();
        for truth in [SplitType::Val, SplitType::Test] {
            let report = self.metrics(split, emb, truth)?;
            let mut t = NodeTable::new(table.labels().to_vec());
            t.add_metrics(&report, Provenance::new("eval"))?;
            per_split.push(t.column(name)?.to_vec());
        }
        let gap = per_split[0]
            .iter()
            .zip(&per_split[1])
            .map(|(v, t)| Some((*v)? - (*t)?))
            .collect();
        let prov = Provenance::new("eval")
            .param("gap", name)
            .param("predictor", "diffusion")
            .seed(self.cfg.atc.seed);
        Ok(table.insert("gap", gap, prov)?)
    }

    fn correlate(&self, table: &NodeTable) -> CliResult<()> {
        let a = &self.cfg.analysis;
        self.write("nodes.csv", |w| table.write_csv(w))?;
        self.write("nodes.manifest.json", |w| table.write_manifest(w))?;
        let mut reports = Vec::new();
        for against in &a.against {
            match correlation_report(table, &a.metric, &self.cfg.eval.ks, against) {
                Ok(r) => reports.push(r),
                Err(Error::UndefinedStatistic(msg)) => {
                    warn!("correlation with {against} undefined: {msg}")
                }
                Err(e) => return Err(e.into()),
            }
        }
        self.write("correlation.csv", |w| {
            writeln!(w, "metric,against,K,r,used,excluded")?;
            for r in &reports {
                r.write_csv(&mut *w, false)?;
            }
            Ok(())
        })?;
        let mut bins = Vec::new();
        for &k in &self.cfg.eval.ks {
            bins.push((
                k,
                bin_report(table, &a.bin_by, &a.bins, &metric_column(&a.metric, k))?,
            ));
        }
        self.write("bins.csv", |w| {
            writeln!(w, "by,value,lower,upper,count,mean")?;
            for (_, b) in &bins {
                for bin in &b.bins {
                    writeln!(
                        w,
                        "{},{},{},{},{},{}",
                        b.by,
                        b.value,
                        bin.lower,
                        bin.upper,
                        bin.count,
                        na(bin.mean)
                    )?;
                }
            }
            Ok(())
        })?;
        if reports.is_empty() && !a.against.is_empty() {
            return Err(Error::UndefinedStatistic("no correlation was defined".into()).into());
        }
        Ok(())
    }

    fn tds(&self, table: &NodeTable, graph: &Graph) -> CliResult<()> {
        let gap = self.cfg.analysis.gap.as_ref().map(|_| "gap");
        let report = tds_report(table, gap)?;
        info!(
            "mean shift {} over {} nodes ({} excluded)",
            report.summary.mean, report.evaluated, report.excluded
        );
        self.write("tds.csv", |w| report.write_csv(w, graph.labels()))?;
        self.write("tds.json", |w| report.write_summary_json(w))
    }

    fn reweight(&self, p: &Prepared) -> CliResult<()> {
        let r = &self.cfg.reweight;
        let a = &self.cfg.atc;
        let config = ReweightConfig {
            iterations: r.iterations,
            interval: r.interval,
            warmup: r.warmup,
            gamma: r.gamma,
            dim: a.dim,
            alpha: a.alpha.clone(),
            variance: a.variance,
            seed: a.seed,
            domain: r.domain,
            renormalize: r.renormalize,
        };
        let run: ReweightRun<f64> = match r.predictor {
            PredictorKind::Dot => run_reweighting(&p.split, &DotProduct, &config)?,
            PredictorKind::CommonNeighbors => {
                run_reweighting(&p.split, &CommonNeighbors::new(&p.split), &config)?
            }
        };
        info!(
            "{} updates, mean weighted concentration {} -> {}",
            run.updates,
            run.initial_weighted_tc,
            run.state
                .history
                .last()
                .map_or(run.initial_weighted_tc, |t| t.mean_weighted_tc)
        );
        self.write("reweight_trace.csv", |w| run.write_trace_csv(w))?;
        self.write("reweighted_adjacency.csv", |w| {
            run.state.write_adjacency_csv(w, p.graph.labels())
        })
    }

    fn bias_oracle(&self) -> CliResult<()> {
        #[derive(Serialize)]
        struct Gof {
            universe: usize,
            cutoff: usize,
            truth_size: usize,
            statistic: f64,
            dof: usize,
            p_value: f64,
        }
        let b = &self.cfg.bias;
        let mut rows = Vec::new();
        let mut hist = Vec::new();
        let mut gof = Vec::new();
        for &e in &b.truth {
            let oracle = BiasOracle::new(b.universe, b.cutoff, e)?;
            let expected = expected_metrics_untrained(oracle);
            let sim = simulate_untrained(oracle, b.trials, b.seed, self.workers)?;
            let pmf = hypergeometric_pmf(oracle);
            for (name, analytic, est) in [
                ("recall", expected.recall, sim.recall),
                ("precision", expected.precision, sim.precision),
                ("f1", expected.f1, sim.f1),
                ("ndcg", expected.ndcg, sim.ndcg),
                ("intersection", expected.intersection, sim.intersection),
            ] {
                rows.push(format!(
                    "{},{},{e},{name},{analytic},{},{}",
                    b.universe, b.cutoff, est.mean, est.stderr
                ));
            }
            for (h, (&obs, &p)) in sim.histogram.iter().zip(&pmf).enumerate() {
                hist.push(format!("{e},{h},{obs},{}", p * b.trials as f64));
            }
            match chi_square_gof(&sim.histogram, &pmf) {
                Ok(t) => gof.push(Gof {
                    universe: b.universe,
                    cutoff: b.cutoff,
                    truth_size: e,
                    statistic: t.statistic,
                    dof: t.dof,
                    p_value: t.p_value,
                }),
                Err(Error::UndefinedStatistic(msg)) => {
                    warn!("goodness of fit for E={e} undefined: {msg}")
                }
                Err(err) => return Err(err.into()),
            }
        }
        self.write("bias.csv", |w| {
            writeln!(w, "N,K,E_size,metric,analytic,empirical,stderr")?;
            for r in &rows {
                writeln!(w, "{r}")?;
            }
            Ok(())
        })?;
        self.write("bias_histogram.csv", |w| {
            writeln!(w, "E_size,hits,observed,expected")?;
            for r in &hist {
                writeln!(w, "{r}")?;
            }
            Ok(())
        })?;
        self.write("bias_gof.json", |w| {
            Ok(serde_json::to_writer_pretty(w, &gof)?)
        })
    }
}

fn na(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |v| v.to_string())
}

fn tolerate_undefined(stage: &str, r: CliResult<()>) -> CliResult<()> {
    match r {
        Err(CliError::Core(Error::UndefinedStatistic(msg))) => {
            warn!("{stage} skipped: {msg}");
            Ok(())
        }
        other => other,
    }
}

/// Uniform node pairs that are edges in no split.
fn sample_negatives(g: &Graph, count: usize, seed: u64) -> CliResult<Vec<(usize, usize)>> {
    let n = g.node_count();
    let available = (n * n.saturating_sub(1) / 2).saturating_sub(g.edge_count());
    if count > available {
        return Err(Error::InvalidParameter(format!(
            "{count} negatives requested, only {available} non-edges exist"
        ))
        .into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u != v && !g.adjacency().contains(u, v) {
            out.push((u.min(v), u.max(v)));
        }
    }
    Ok(out)
}
