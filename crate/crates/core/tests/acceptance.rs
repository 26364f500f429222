//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails or overruns its time budget.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use compbias::encoder::{axis_effect_size, delta, EmbeddingRow, EmbeddingSet, Role};
use compbias::interaction::{
    classify_bucket, permutation_test, triple_interaction, Bucket, InteractionSpec,
};
use compbias::ledger::{
    logistic, simulate, ContinuityPolicy, GenderLabel, Ledger, NoiseMode, OracleSpec, Outcome,
    OutcomeMode, StatsOptions, UtteranceRecord,
};
use compbias::prompt_space::{
    enumerate_bi, enumerate_configs, enumerate_tri, enumerate_univariate, select_polar_descriptors,
    AuditConfig, Axis, CompositionalSeedSet, Descriptor, InstructionJob, Lexicon, SemanticConfig,
};
use compbias::seed::derive_seed;

type Check = Result<String, String>;
type Criterion = (u32, &'static str, Duration, fn() -> Check);

const SOFT: StatsOptions = StatsOptions {
    outcome: OutcomeMode::Soft,
    continuity: ContinuityPolicy::Clamp,
};
const HARD: StatsOptions = StatsOptions {
    outcome: OutcomeMode::Hard,
    continuity: ContinuityPolicy::Clamp,
};

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

/// Weights drawn uniformly from [-scale, scale] for every descriptor.
fn random_weights(cfg: &AuditConfig, seed: u64, scale: f64) -> OracleSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    cfg.lexicon
        .descriptors()
        .iter()
        .fold(OracleSpec::default(), |o, d| o.weight(&d.id, rng.gen_range(-scale..=scale)))
}

fn seed_set_for(cfg: &AuditConfig, oracle: &OracleSpec) -> CompositionalSeedSet {
    select_polar_descriptors(
        &cfg.lexicon,
        |d| Some(logistic(oracle.true_logit([d.id.as_str()]))),
        2,
    )
    .unwrap()
}

fn stage2_jobs(cfg: &AuditConfig, seed: &CompositionalSeedSet) -> Vec<InstructionJob> {
    let sampling = cfg.sampling();
    let mut jobs = enumerate_univariate(&cfg.lexicon, &sampling);
    jobs.extend(enumerate_bi(seed, &sampling));
    jobs.extend(enumerate_tri(seed, &sampling));
    jobs
}

fn stage2_specs(seed: &CompositionalSeedSet) -> Vec<InteractionSpec> {
    seed.bi_configs()
        .iter()
        .chain(seed.tri_configs().iter())
        .map(|c| InteractionSpec::for_config(c).unwrap())
        .collect()
}

fn c1_enumeration() -> Check {
    let cfg = AuditConfig::default_config();
    let sampling = cfg.sampling();
    let uni = enumerate_univariate(&cfg.lexicon, &sampling);
    let seed = select_polar_descriptors(&cfg.lexicon, |_| Some(0.5), 2).map_err(|e| e.to_string())?;
    let bi = enumerate_bi(&seed, &sampling);
    let tri = enumerate_tri(&seed, &sampling);
    let distinct = |jobs: &[InstructionJob]| {
        let mut ids: Vec<&str> = jobs.iter().map(|j| j.condition_id.as_str()).collect();
        ids.sort_unstable();
        ids.dedup();
        ids.len()
    };
    let got = [
        (distinct(&uni), uni.len()),
        (distinct(&bi), bi.len()),
        (distinct(&tri), tri.len()),
    ];
    ensure(
        got == [(69, 6900), (32, 3200), (32, 3200)],
        format!("got {got:?}"),
    )?;
    Ok("69/6900 univariate, 32/3200 bi, 32/3200 tri".into())
}

fn c2_additive_null() -> Check {
    let cfg = AuditConfig::default_config();
    let oracle = random_weights(&cfg, 11, 1.5);
    let seed = seed_set_for(&cfg, &oracle);
    let ledger = Ledger::ingest(simulate(&oracle, &stage2_jobs(&cfg, &seed))).map_err(|e| e.to_string())?;
    let specs = stage2_specs(&seed);
    let mut worst: f64 = 0.0;
    for s in &specs {
        worst = worst.max(s.evaluate(&ledger, &SOFT).map_err(|e| e.to_string())?.abs());
    }
    ensure(worst <= 1e-9, format!("max |I| = {worst:e}"))?;
    Ok(format!("{} terms, max |I| = {worst:.2e}", specs.len()))
}

fn c3_injected_recovery() -> Check {
    let cfg = AuditConfig::default_config();

    // Deterministic: three pair terms and one triple term.
    let base = random_weights(&cfg, 12, 1.0);
    let seed = seed_set_for(&cfg, &base);
    let (s0, s1) = (&seed.status[0].id, &seed.status[1].id);
    let (cf, cm) = (&seed.career_female, &seed.career_male);
    let (pf, pm) = (&seed.persona_female, &seed.persona_male);
    let oracle = base
        .clone()
        .inject(&[s0, &cf[0].id], 0.5)
        .inject(&[&cm[0].id, &pf[1].id], -1.2)
        .inject(&[s1, &pm[0].id], 3.0)
        .inject(&[s0, &cf[0].id, &pf[0].id], -1.2);
    let ledger = Ledger::ingest(simulate(&oracle, &stage2_jobs(&cfg, &seed))).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for s in stage2_specs(&seed) {
        let got = s.evaluate(&ledger, &SOFT).map_err(|e| e.to_string())?;
        let want = oracle.injected_term(s.descriptors.iter().map(String::as_str));
        worst = worst.max((got - want).abs());
    }
    ensure(worst <= 1e-9, format!("deterministic max error {worst:e}"))?;
    let exact_worst = worst;

    // Bernoulli: every bi condition carries an injected term, n = 1000.
    let mut noisy = random_weights(&cfg, 13, 0.25);
    noisy.noise = NoiseMode::Bernoulli;
    noisy.seed = 2024;
    noisy.samples_per_job = 10;
    let seed = seed_set_for(&cfg, &noisy);
    let values = [0.5, -1.2, 3.0];
    let bi = seed.bi_configs();
    for (i, c) in bi.iter().enumerate() {
        let ids: Vec<&str> = c.populated().map(|d| d.id.as_str()).collect();
        noisy = noisy.inject(&ids, values[i % values.len()]);
    }
    let sampling = cfg.sampling();
    let mut jobs: Vec<InstructionJob> = enumerate_configs(
        &seed.status.iter().chain(seed.careers()).chain(seed.personas()).map(SemanticConfig::univariate).collect::<Vec<_>>(),
        &sampling,
    );
    jobs.extend(enumerate_bi(&seed, &sampling));
    let ledger = Ledger::ingest(simulate(&noisy, &jobs)).map_err(|e| e.to_string())?;
    let mut within = 0;
    let mut worst: f64 = 0.0;
    for c in &bi {
        let s = InteractionSpec::for_config(c).unwrap();
        let n = ledger.n(&s.composite).unwrap_or(0);
        ensure(n == 1000, format!("condition has n = {n}"))?;
        let got = s.evaluate(&ledger, &HARD).map_err(|e| e.to_string())?;
        let err = (got - noisy.injected_term(s.descriptors.iter().map(String::as_str))).abs();
        worst = worst.max(err);
        within += usize::from(err <= 0.5);
    }
    let rate = within as f64 / bi.len() as f64;
    ensure(rate >= 0.95, format!("bernoulli: {within}/{} within 0.5", bi.len()))?;
    Ok(format!(
        "deterministic max error {:.1e}; bernoulli {within}/{} within 0.5 (worst {worst:.3})",
        exact_worst,
        bi.len()
    ))
}

fn c4_reconstruction() -> Check {
    let cfg = AuditConfig::default_config();
    let mut oracle = random_weights(&cfg, 14, 1.5);
    oracle.noise = NoiseMode::Bernoulli;
    oracle.seed = 99;
    let seed = seed_set_for(&cfg, &oracle);
    let ledger = Ledger::ingest(simulate(&oracle, &stage2_jobs(&cfg, &seed))).map_err(|e| e.to_string())?;
    let logit = |id: &str| ledger.condition_stats(id, &HARD).map(|s| s.logit).map_err(|e| e.to_string());
    let mut worst: f64 = 0.0;
    let tri = seed.tri_configs();
    for c in &tri {
        let spec = InteractionSpec::for_config(c).unwrap();
        let l_u: Vec<f64> = spec.univariates.iter().map(|u| logit(u)).collect::<Result<_, _>>()?;
        let i_pairs: Vec<f64> = c
            .facets()
            .iter()
            .map(|f| InteractionSpec::for_config(f).unwrap().evaluate(&ledger, &HARD).map_err(|e| e.to_string()))
            .collect::<Result<_, _>>()?;
        let i3 = spec.evaluate(&ledger, &HARD).map_err(|e| e.to_string())?;
        let l_multi = logit(&spec.composite)?;
        let residual = l_multi - l_u.iter().sum::<f64>() - i_pairs.iter().sum::<f64>() - i3;
        worst = worst.max(residual.abs());
        let direct = triple_interaction(l_multi, [l_u[0], l_u[1], l_u[2]], [i_pairs[0], i_pairs[1], i_pairs[2]]);
        worst = worst.max((direct - i3).abs());
    }
    ensure(tri.len() == 32 && worst <= 1e-12, format!("{} triples, max residual {worst:e}", tri.len()))?;
    Ok(format!("32 triples, max residual {worst:.1e}"))
}

fn c5_permutation() -> Check {
    let cfg = AuditConfig::default_config();
    let mut descriptors = Vec::new();
    for i in 0..200 {
        descriptors.push(Descriptor::new(format!("car{i:03}"), Axis::Career, format!("career {i}")));
        descriptors.push(Descriptor::new(format!("per{i:03}"), Axis::Persona, format!("persona {i}")));
    }
    let lexicon = Lexicon::new(descriptors).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut oracle = lexicon
        .descriptors()
        .iter()
        .fold(OracleSpec::default(), |o, d| o.weight(&d.id, rng.gen_range(-1.0..=1.0)));
    oracle.noise = NoiseMode::Bernoulli;
    oracle.seed = 55;

    let pairs: Vec<SemanticConfig> = (0..200)
        .map(|i| {
            SemanticConfig::from_descriptors([
                lexicon.get(&format!("car{i:03}")).unwrap(),
                lexicon.get(&format!("per{i:03}")).unwrap(),
            ])
            .unwrap()
        })
        .collect();
    let mut configs: Vec<SemanticConfig> = lexicon.descriptors().iter().map(SemanticConfig::univariate).collect();
    configs.extend(pairs.iter().cloned());
    let ledger = Ledger::ingest(simulate(&oracle, &enumerate_configs(&configs, &cfg.sampling())))
        .map_err(|e| e.to_string())?;

    let p_values: Vec<f64> = pairs
        .par_iter()
        .map(|c| {
            let spec = InteractionSpec::for_config(c).unwrap();
            permutation_test(&ledger, &spec, &HARD, 10_000, derive_seed(77, &spec.composite))
                .map(|o| o.p_value)
                .map_err(|e| e.to_string())
        })
        .collect::<Result<_, _>>()?;
    let rejections = p_values.iter().filter(|&&p| p < 0.05).count();
    let rate = rejections as f64 / p_values.len() as f64;
    ensure(rate <= 0.10, format!("null rejection rate {rate:.3}"))?;

    // Power: one pair carrying +3.0.
    let powered = oracle.clone().inject(&["car000", "per000"], 3.0);
    let ledger = Ledger::ingest(simulate(&powered, &enumerate_configs(&configs[..], &cfg.sampling())))
        .map_err(|e| e.to_string())?;
    let spec = InteractionSpec::for_config(&pairs[0]).unwrap();
    let out = permutation_test(&ledger, &spec, &HARD, 10_000, 78).map_err(|e| e.to_string())?;
    ensure(out.p_value < 0.01, format!("injected +3.0 gave p = {}", out.p_value))?;
    Ok(format!(
        "null rejection {rejections}/200 = {rate:.3}; injected +3.0: I = {:.3}, p = {:.4}",
        out.observed, out.p_value
    ))
}

fn labels(condition: &str, females: usize, n: usize) -> Vec<UtteranceRecord> {
    (0..n)
        .map(|i| UtteranceRecord {
            condition_id: condition.to_string(),
            sample_index: i as u64,
            template_id: "t01".into(),
            transcript_id: "c01".into(),
            outcome: Outcome::Label(if i < females { GenderLabel::Female } else { GenderLabel::Male }),
        })
        .collect()
}

fn c6_clamp() -> Check {
    let mut records = Vec::new();
    for k in [0, 3, 50, 97, 100] {
        records.extend(labels(&format!("k{k}"), k, 100));
    }
    let ledger = Ledger::ingest(records).map_err(|e| e.to_string())?;
    let l = |k: usize| ledger.condition_stats(&format!("k{k}"), &HARD).unwrap().logit;
    let all_female = l(100);
    ensure(
        (all_female - 199f64.ln()).abs() <= 1e-12,
        format!("all-Female logit {all_female} vs ln 199"),
    )?;
    let mut worst: f64 = 0.0;
    for k in [0, 3, 50, 97, 100] {
        worst = worst.max((l(k) + l(100 - k)).abs());
    }
    ensure(worst <= 1e-12, format!("oddness residual {worst:e}"))?;
    Ok(format!("logit(100/100) = {all_female:.15}; max oddness residual {worst:.1e}"))
}

fn c7_buckets() -> Check {
    let cases = [
        (7.81, 0.009, Bucket::Dark),
        (7.81, 1e-4, Bucket::Dark),
        (-7.68, 0.009, Bucket::Dark),
        (-7.68, 1e-4, Bucket::Dark),
        (0.3, 0.5, Bucket::Light),
    ];
    for (i, p, want) in cases {
        let got = classify_bucket(i, p);
        ensure(got == want, format!("({i}, {p}) gave {got:?}"))?;
    }
    Ok("+7.81 and -7.68 Dark at p < 0.01; (0.3, 0.5) Light".into())
}

fn random_vectors(rng: &mut ChaCha8Rng, count: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect()
}

fn c8_encoder() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst_scale: f64 = 0.0;
    let mut deltas = Vec::new();
    for _ in 0..50 {
        let traits = random_vectors(&mut rng, 3, 16);
        let female = random_vectors(&mut rng, 4, 16);
        let male = random_vectors(&mut rng, 4, 16);
        let d = delta(&traits, &female, &male).map_err(|e| e.to_string())?;
        let scale = |vs: &[Vec<f64>], c: f64| vs.iter().map(|v| v.iter().map(|x| x * c).collect()).collect::<Vec<Vec<f64>>>();
        let scaled = delta(&scale(&traits, 3.7), &scale(&female, 0.02), &scale(&male, 125.0)).map_err(|e| e.to_string())?;
        worst_scale = worst_scale.max((d - scaled).abs());
        let swapped = delta(&traits, &male, &female).map_err(|e| e.to_string())?;
        ensure(swapped == -d, format!("anchor swap: {d} vs {swapped}"))?;
        deltas.push(d);
    }
    ensure(worst_scale <= 1e-12, format!("scale residual {worst_scale:e}"))?;

    let d = axis_effect_size("g", &deltas).map_err(|e| e.to_string())?;
    let negated: Vec<f64> = deltas.iter().map(|x| -x).collect();
    let nd = axis_effect_size("g", &negated).map_err(|e| e.to_string())?;
    ensure(nd.cohens_d == -d.cohens_d, "d does not negate exactly")?;

    let positive: Vec<f64> = (0..20).map(|_| rng.gen_range(0.01..0.3)).collect();
    let pos = axis_effect_size("pos", &positive).map_err(|e| e.to_string())?;
    ensure(pos.cohens_d > 0.0, format!("all-positive axis gave d = {}", pos.cohens_d))?;
    Ok(format!(
        "scale residual {worst_scale:.1e}; swap negates Δ and d exactly; positive axis d = {:.3}",
        pos.cohens_d
    ))
}

fn write_fixture(dir: &Path) {
    let cfg = AuditConfig::default_config();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let dim = 8;
    let mut rows = Vec::new();
    for d in cfg.lexicon.descriptors() {
        for ctx in ["t01", "t02"] {
            rows.push(EmbeddingRow {
                role: Role::Trait,
                key: d.id.clone(),
                context: Some(ctx.into()),
                vector: random_vectors(&mut rng, 1, dim).remove(0),
            });
        }
    }
    for (role, words) in [(Role::Female, &cfg.anchors.female), (Role::Male, &cfg.anchors.male)] {
        for w in words {
            rows.push(EmbeddingRow {
                role,
                key: w.clone(),
                context: None,
                vector: random_vectors(&mut rng, 1, dim).remove(0),
            });
        }
    }
    let set = EmbeddingSet {
        encoder: "toy-encoder".into(),
        dim,
        rows,
    };
    std::fs::write(dir.join("toy.tsv"), set.to_text()).unwrap();
    std::fs::write(
        dir.join("manifest.toml"),
        "seed = 31\niterations = 1000\noutput_dir = \"out\"\nembeddings = [\"toy.tsv\"]\n\n\
         [oracle]\nnoise = \"bernoulli\"\nseed = 4\nbase_logit = 0.1\n\
         cue_weights = { nurse = 2.0, midwife = 1.8, plumber = -2.2, electrician = -1.9, warm = 0.9, bold = -0.8 }\n\
         injected = [{ descriptors = [\"high\", \"nurse\"], value = 1.5 }]\n",
    )
    .unwrap();
}

fn c9_determinism() -> Check {
    let input = tempfile::tempdir().map_err(|e| e.to_string())?;
    write_fixture(input.path());
    let manifest = input.path().join("manifest.toml");
    let run = |out: &Path| -> Result<Vec<(String, Vec<u8>)>, String> {
        let status = Command::new(env!("CARGO_BIN_EXE_compbias"))
            .arg("all")
            .arg("--manifest")
            .arg(&manifest)
            .arg("--out")
            .arg(out)
            .output()
            .map_err(|e| e.to_string())?;
        ensure(status.status.success(), String::from_utf8_lossy(&status.stderr).into_owned())?;
        let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(out)
            .map_err(|e| e.to_string())?
            .map(|e| {
                let e = e.unwrap();
                (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
            })
            .collect();
        files.sort();
        Ok(files)
    };
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    let first = run(a.path())?;
    let second = run(b.path())?;
    let names: Vec<&str> = first.iter().map(|(n, _)| n.as_str()).collect();
    for expected in ["stage1.json", "stage2.json", "interactions.jsonl", "encoder.json", "ledger_simulated.jsonl"] {
        ensure(names.contains(&expected), format!("missing {expected}"))?;
    }
    ensure(first == second, "outputs differ between runs")?;
    Ok(format!("{} files byte-identical", first.len()))
}

fn main() {
    let criteria: [Criterion; 9] = [
        (1, "enumeration cardinalities", Duration::from_secs(1), c1_enumeration),
        (2, "additivity null", Duration::from_secs(10), c2_additive_null),
        (3, "injected-effect recovery", Duration::from_secs(120), c3_injected_recovery),
        (4, "reconstruction identity", Duration::from_secs(1), c4_reconstruction),
        (5, "permutation calibration and power", Duration::from_secs(600), c5_permutation),
        (6, "continuity clamp", Duration::from_secs(1), c6_clamp),
        (7, "bucket fixture", Duration::from_secs(1), c7_buckets),
        (8, "encoder-bias properties", Duration::from_secs(1), c8_encoder),
        (9, "end-to-end determinism", Duration::from_secs(600), c9_determinism),
    ];
    let mut failures = 0;
    for (n, name, budget, f) in criteria {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let result = result.and_then(|msg| {
            if elapsed <= budget {
                Ok(msg)
            } else {
                Err(format!("{msg}; took {elapsed:.2?}, budget {budget:?}"))
            }
        });
        match result {
            Ok(msg) => println!("PASS criterion {n} ({name}) [{elapsed:.2?}]: {msg}"),
            Err(msg) => {
                failures += 1;
                println!("FAIL criterion {n} ({name}) [{elapsed:.2?}]: {msg}");
            }
        }
    }
    if failures > 0 {
        println!("{failures} criterion(s) failed");
        std::process::exit(1);
    }
    println!("all 9 primary criteria passed");
}
