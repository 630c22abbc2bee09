//! End-to-end run on generated toy data: ingest, clean, train lexicons, tune
//! and run the miner, select in-domain data, train language models, translate
//! a test set by lexicon lookup and score the systems.
//!
//! Everything under the work directory is a function of the seed, so two runs
//! produce identical files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::Args;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::cli::commands::*;
use crate::cli::files::{read_parallel_files, read_parallel_tsv, read_sentences, write_atomic, write_string};
use crate::error::{Error, Result};
use crate::eval::{self, EvalReport};
use crate::synth::{self, Domain, World};
use crate::text::{ParallelCorpus, Sentence};
use crate::word_align::TranslationLexicon;

#[derive(Debug, Clone, Args)]
pub struct DemoArgs {
    /// Directory for generated data and all outputs; must be empty or absent
    /// unless --force is given.
    pub workdir: PathBuf,
    /// Share of candidates kept by both selection steps.
    #[arg(long, default_value_t = 0.2)]
    pub rate: f64,
}

const TRAIN_TALKS: usize = 8;
const TEST_TALKS: usize = 4;
const SEGMENTS_PER_TRAIN_TALK: usize = 25;
const SEGMENTS_PER_TEST_TALK: usize = 15;
const GENERAL_PAIRS: usize = 600;
const COMPARABLE_DOCS: usize = 60;
const TUNING_DOCS: usize = 20;
const SENTENCES_PER_DOC: usize = 10;
const MONO_GENERAL: usize = 800;
const MONO_IN_DOMAIN: usize = 200;
const NOISE: f64 = 0.1;
const LM_ORDER: usize = 4;
const LEX_ITERS: usize = 10;

fn stage<T>(name: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Stage {
        stage: name,
        source: Box::new(e),
    })
}

fn file_text(path: &Path, lines: &[String]) -> (PathBuf, String) {
    let mut text = String::new();
    for l in lines {
        text.push_str(l);
        text.push('\n');
    }
    (path.to_path_buf(), text)
}

/// Paths of everything the demo reads or writes.
struct Layout {
    data: PathBuf,
    run: PathBuf,
}

impl Layout {
    fn data(&self, name: &str) -> PathBuf {
        self.data.join(name)
    }

    fn run(&self, name: &str) -> PathBuf {
        self.run.join(name)
    }
}

fn talks(
    world: &World,
    rng: &mut rand_chacha::ChaCha8Rng,
    first_id: usize,
    n: usize,
    segs: usize,
) -> Vec<(String, Vec<(String, String)>)> {
    (0..n)
        .map(|k| {
            (
                (first_id + k).to_string(),
                world.parallel(rng, Domain::InDomain, segs, NOISE),
            )
        })
        .collect()
}

fn talk_xml(talks: &[(String, Vec<(String, String)>)], source: bool) -> String {
    let side: Vec<(String, Vec<String>)> = talks
        .iter()
        .map(|(id, segs)| {
            let lines = segs
                .iter()
                .map(|(s, t)| if source { s.clone() } else { t.clone() })
                .collect();
            (id.clone(), lines)
        })
        .collect();
    synth::ted_xml(&side)
}

/// General-domain pairs with the usual dirt mixed in: repeated pairs, pairs
/// whose sides differ wildly in length, empty sides and control characters.
fn noisy_general(world: &World, rng: &mut rand_chacha::ChaCha8Rng) -> Vec<(String, String)> {
    let mut pairs = world.parallel(rng, Domain::General, GENERAL_PAIRS, NOISE);
    let mut dirt: Vec<(String, String)> = Vec::new();
    for _ in 0..20 {
        dirt.push(pairs[rng.gen_range(0..pairs.len())].clone());
    }
    for (s, t) in world.parallel(rng, Domain::General, 6, 0.0) {
        let long = format!("{s} {s}");
        dirt.push((long, t.split(' ').next().unwrap_or_default().to_string()));
    }
    for (s, _) in world.parallel(rng, Domain::General, 5, 0.0) {
        dirt.push((s, String::new()));
    }
    for (s, t) in world.parallel(rng, Domain::General, 4, 0.0) {
        dirt.push((format!("{s} \u{7}"), t));
    }
    for d in dirt {
        let at = rng.gen_range(0..=pairs.len());
        pairs.insert(at, d);
    }
    pairs
}

fn generate(layout: &Layout, seed: u64, force: bool) -> Result<()> {
    let world = World::standard();
    let mut rng = synth::rng(seed);
    let mut files: Vec<(PathBuf, String)> = Vec::new();

    let train = talks(&world, &mut rng, 1001, TRAIN_TALKS, SEGMENTS_PER_TRAIN_TALK);
    let test = talks(&world, &mut rng, 2001, TEST_TALKS, SEGMENTS_PER_TEST_TALK);
    files.push((layout.data("ted.src.xml"), talk_xml(&train, true)));
    files.push((layout.data("ted.tgt.xml"), talk_xml(&train, false)));
    files.push((layout.data("test.src.xml"), talk_xml(&test, true)));
    files.push((layout.data("test.tgt.xml"), talk_xml(&test, false)));

    let general = noisy_general(&world, &mut rng);
    let (gs, gt): (Vec<String>, Vec<String>) = general.into_iter().unzip();
    files.push(file_text(&layout.data("general.src"), &gs));
    files.push(file_text(&layout.data("general.tgt"), &gt));

    let mut mono = world.monolingual_target(&mut rng, Domain::General, MONO_GENERAL);
    mono.extend(world.monolingual_target(&mut rng, Domain::InDomain, MONO_IN_DOMAIN));
    mono.shuffle(&mut rng);
    files.push(file_text(&layout.data("mono.tgt"), &mono));

    for (name, n, gold_file) in [
        ("comparable", COMPARABLE_DOCS, None),
        ("tuning", TUNING_DOCS, Some("tuning.gold")),
    ] {
        let mut manifest = Vec::new();
        let mut gold = Vec::new();
        for k in 0..n {
            let id = format!("doc{k:04}");
            let doc = world.comparable_pair(&mut rng, &id, SENTENCES_PER_DOC, 0.5);
            let lines = |d: &crate::text::Document| d.sentences.iter().map(|s| s.raw().to_string()).collect::<Vec<_>>();
            let src = format!("{name}/src/{id}.txt");
            let tgt = format!("{name}/tgt/{id}.txt");
            files.push(file_text(&layout.data(&src), &lines(&doc.pair.source)));
            files.push(file_text(&layout.data(&tgt), &lines(&doc.pair.target)));
            manifest.push(format!("{src}\t{tgt}"));
            gold.extend(doc.links.iter().map(|(i, j)| format!("{id}\t{i}\t{j}")));
        }
        files.push(file_text(&layout.data(&format!("{name}.manifest")), &manifest));
        if let Some(g) = gold_file {
            files.push(file_text(&layout.data(g), &gold));
        }
    }

    for (path, text) in files {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        write_string(&path, force, &text)?;
    }
    Ok(())
}

fn value<'a>(summary: &'a str, key: &str) -> Result<&'a str> {
    summary
        .lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .ok_or_else(|| Error::InvalidArgument(format!("missing {key} in stage output")))
}

fn number(summary: &str, key: &str) -> Result<f64> {
    let v = value(summary, key)?;
    v.parse()
        .map_err(|_| Error::InvalidArgument(format!("{key}={v} is not a number")))
}

fn write_pairs(path: &Path, force: bool, corpora: &[&ParallelCorpus]) -> Result<usize> {
    let mut n = 0;
    write_atomic(path, force, |w| {
        for c in corpora {
            for p in &c.pairs {
                writeln!(w, "{}\t{}", p.source.joined(), p.target.joined())?;
                n += 1;
            }
        }
        Ok(())
    })?;
    Ok(n)
}

/// Word-by-word translation with the most probable lexicon entry; unknown
/// words are copied.
pub fn gloss(lexicon: &TranslationLexicon, sentence: &Sentence) -> String {
    sentence
        .tokens()
        .iter()
        .map(|t| lexicon.translations(t).next().map_or(t.as_str(), |(w, _)| w))
        .collect::<Vec<_>>()
        .join(" ")
}

fn translate(g: &Globals, lexicon: &Path, input: &Path, out: &Path) -> Result<()> {
    let lex = TranslationLexicon::read_tsv(crate::cli::files::open(lexicon)?)?;
    let text = read_sentences(input, g.profile)?;
    write_atomic(out, g.force, |w| {
        for s in &text {
            writeln!(w, "{}", gloss(&lex, s))?;
        }
        Ok(())
    })
}

fn indent(text: &str) -> String {
    text.lines().map(|l| format!("  {l}\n")).collect()
}

const SYSTEMS: [&str; 3] = ["BASE", "EXT", "SEL"];

pub fn run(g: &Globals, a: &DemoArgs) -> Result<String> {
    let occupied = std::fs::read_dir(&a.workdir)
        .map(|mut d| d.next().is_some())
        .unwrap_or(false);
    if occupied && !g.force {
        return Err(Error::WouldOverwrite(a.workdir.clone()));
    }
    if !(a.rate > 0.0 && a.rate <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "--rate must be in (0, 1], got {}",
            a.rate
        )));
    }
    let layout = Layout {
        data: a.workdir.join("data"),
        run: a.workdir.join("run"),
    };
    for d in [&layout.data, &layout.run] {
        std::fs::create_dir_all(d).map_err(|e| Error::io(d, e))?;
    }
    // stages overwrite their own earlier outputs; the guard above already ran
    let g = &Globals { force: true, ..*g };
    let mut report = String::new();
    let _ = writeln!(report, "corpusforge demo\nseed={}\nrate={}\n", g.seed, a.rate);

    stage("generate", generate(&layout, g.seed, true))?;

    for (xml, out, docs) in [
        ("ted.src.xml", "ted.src", None),
        ("ted.tgt.xml", "ted.tgt", None),
        ("test.src.xml", "test.src", Some("test.docs")),
        ("test.tgt.xml", "test.tgt", None),
    ] {
        stage(
            "ingest-ted",
            ingest_ted(
                g,
                &IngestTedArgs {
                    xml: layout.data(xml),
                    out: layout.run(out),
                    doc_map: docs.map(|d| layout.run(d)),
                },
            ),
        )?;
    }

    let _ = writeln!(report, "[corpus statistics]");
    for (label, src, tgt) in [
        ("in-domain", layout.run("ted.src"), layout.run("ted.tgt")),
        ("general", layout.data("general.src"), layout.data("general.tgt")),
        ("test", layout.run("test.src"), layout.run("test.tgt")),
    ] {
        let s = stage(
            "stats",
            stats(
                g,
                &StatsArgs {
                    file: src,
                    tgt: Some(tgt),
                },
            ),
        )?;
        let _ = writeln!(report, "{label}:\n{}", indent(&s));
    }
    let s = stage(
        "stats",
        stats(
            g,
            &StatsArgs {
                file: layout.data("mono.tgt"),
                tgt: None,
            },
        ),
    )?;
    let _ = writeln!(report, "monolingual:\n{}", indent(&s));

    let cleaned = stage(
        "clean",
        clean(
            g,
            &CleanArgs {
                input: ParallelInput::files(layout.data("general.src"), layout.data("general.tgt")),
                out_src: layout.run("general.clean.src"),
                out_tgt: layout.run("general.clean.tgt"),
                max_ratio: 4.0,
                report: Some(layout.run("clean.report")),
            },
        ),
    )?;
    let _ = writeln!(report, "[cleaning]\n{}", indent(&cleaned));

    let ted = stage(
        "train-lex",
        read_parallel_files(&layout.run("ted.src"), &layout.run("ted.tgt"), g.profile),
    )?;
    let general = stage(
        "train-lex",
        read_parallel_files(
            &layout.run("general.clean.src"),
            &layout.run("general.clean.tgt"),
            g.profile,
        ),
    )?;
    stage(
        "train-lex",
        write_pairs(&layout.run("base.tsv"), true, &[&ted, &general]),
    )?;
    let lex_args = |input: &str, out: &str| TrainLexArgs {
        input: ParallelInput::tsv(layout.run(input)),
        out: layout.run(&format!("{out}.lex")),
        reverse_out: Some(layout.run(&format!("{out}.rev.lex"))),
        iters: LEX_ITERS,
    };
    stage("train-lex", train_lex(g, &lex_args("base.tsv", "mining")))?;

    let tuned = stage(
        "tune-mine",
        tune_mine(
            g,
            &TuneMineArgs {
                manifest: layout.data("tuning.manifest"),
                gold: layout.data("tuning.gold"),
                lexicon: layout.run("mining.lex"),
                out: layout.run("tuning.txt"),
                thresholds: None,
                penalties: None,
                min_prob: 0.1,
            },
        ),
    )?;
    let _ = writeln!(report, "[mining parameter tuning]\n{}", indent(&tuned));
    let threshold = stage("tune-mine", number(&tuned, "best_threshold"))?;
    let gap_penalty = stage("tune-mine", number(&tuned, "best_gap_penalty"))?;

    let mined = stage(
        "mine",
        mine(
            g,
            &MineArgs {
                manifest: layout.data("comparable.manifest"),
                lexicon: layout.run("mining.lex"),
                out: layout.run("mined.tsv"),
                report: Some(layout.run("mining.report")),
                threshold,
                gap_penalty,
                min_prob: 0.1,
            },
        ),
    )?;
    let yield_lines: String = mined
        .lines()
        .filter(|l| !l.starts_with("yield."))
        .map(|l| format!("{l}\n"))
        .collect();
    let _ = writeln!(report, "[mining]\n{}", indent(&yield_lines));

    let mined_corpus = stage("mine", read_parallel_tsv(&layout.run("mined.tsv"), g.profile))?;
    stage(
        "select",
        write_pairs(&layout.run("pool.tsv"), true, &[&general, &mined_corpus]),
    )?;
    let pool = stage("select", read_parallel_tsv(&layout.run("pool.tsv"), g.profile))?;
    stage(
        "select",
        crate::cli::files::write_sentences(&layout.run("pool.tgt"), true, pool.targets()),
    )?;
    let selected = stage(
        "select",
        select(
            g,
            &SelectArgs {
                in_domain: layout.run("ted.tgt"),
                general: layout.run("pool.tgt"),
                parallel: Some(layout.run("pool.tsv")),
                in_domain_source: Some(layout.run("ted.src")),
                rate: a.rate,
                weights: "1,1,1".into(),
                out: layout.run("selected.tsv"),
                table: Some(layout.run("selected.scores")),
                lm_order: 3,
                edit_sample_size: 2000,
                pair_mode: crate::select::PairMode::Both,
            },
        ),
    )?;
    let _ = writeln!(report, "[parallel data selection]\n{}", indent(&selected));

    let selected_corpus = stage("select", read_parallel_tsv(&layout.run("selected.tsv"), g.profile))?;
    stage("train-lex", write_pairs(&layout.run("BASE.tsv"), true, &[&ted]))?;
    stage(
        "train-lex",
        write_pairs(&layout.run("EXT.tsv"), true, &[&ted, &general, &mined_corpus]),
    )?;
    stage(
        "train-lex",
        write_pairs(&layout.run("SEL.tsv"), true, &[&ted, &selected_corpus]),
    )?;
    let mut sizes = String::new();
    for sys in SYSTEMS {
        let s = stage("train-lex", train_lex(g, &lex_args(&format!("{sys}.tsv"), sys)))?;
        let _ = writeln!(
            sizes,
            "{sys}.pairs={}\n{sys}.entries={}",
            value(&s, "pairs")?,
            value(&s, "entries")?
        );
    }
    let _ = writeln!(report, "[translation lexicons]\n{}", indent(&sizes));

    let mono_sel = stage(
        "select",
        select(
            g,
            &SelectArgs {
                in_domain: layout.run("ted.tgt"),
                general: layout.data("mono.tgt"),
                parallel: None,
                in_domain_source: None,
                rate: a.rate,
                weights: "1,1,1".into(),
                out: layout.run("mono.selected"),
                table: Some(layout.run("mono.scores")),
                lm_order: 3,
                edit_sample_size: 2000,
                pair_mode: crate::select::PairMode::Target,
            },
        ),
    )?;
    let _ = writeln!(report, "[language model data selection]\n{}", indent(&mono_sel));

    let ted_tgt = stage("train-lm", read_sentences(&layout.run("ted.tgt"), g.profile))?;
    let mono = stage("train-lm", read_sentences(&layout.data("mono.tgt"), g.profile))?;
    let mono_selected = stage("train-lm", read_sentences(&layout.run("mono.selected"), g.profile))?;
    let lm_texts: [(&str, Vec<&Sentence>); 3] = [
        ("in-domain", ted_tgt.iter().collect()),
        ("general", ted_tgt.iter().chain(&mono).collect()),
        ("selected", ted_tgt.iter().chain(&mono_selected).collect()),
    ];
    let mut ppl_lines = String::new();
    for (name, text) in lm_texts {
        let text_path = layout.run(&format!("lm.{name}.txt"));
        stage(
            "train-lm",
            crate::cli::files::write_sentences(&text_path, true, text.iter().copied()),
        )?;
        let arpa = layout.run(&format!("lm.{name}.arpa"));
        stage(
            "train-lm",
            train_lm(
                g,
                &TrainLmArgs {
                    text: text_path,
                    out: arpa.clone(),
                    order: LM_ORDER,
                    min_count: 1,
                },
            ),
        )?;
        let p = stage(
            "ppl",
            ppl(
                g,
                &PplArgs {
                    text: layout.run("test.tgt"),
                    model: arpa,
                },
            ),
        )?;
        let _ = writeln!(
            ppl_lines,
            "{name}.sentences={}\n{name}.perplexity={}\n{name}.oov={}",
            text.len(),
            value(&p, "perplexity")?,
            value(&p, "oov")?
        );
    }
    let _ = writeln!(
        report,
        "[language models, order {LM_ORDER}, test perplexity]\n{}",
        indent(&ppl_lines)
    );

    let mut reports: BTreeMap<(&str, &str), EvalReport> = BTreeMap::new();
    for sys in SYSTEMS {
        for (dir, lex, input, reference) in [
            ("src-tgt", format!("{sys}.lex"), "test.src", "test.tgt"),
            ("tgt-src", format!("{sys}.rev.lex"), "test.tgt", "test.src"),
        ] {
            let hyp = layout.run(&format!("test.{sys}.{dir}.hyp"));
            stage("translate", translate(g, &layout.run(&lex), &layout.run(input), &hyp))?;
            let args = ScoreArgs {
                hyp,
                reference: layout.run(reference),
                docs: Some(layout.run("test.docs")),
                smooth: false,
                no_shifts: false,
                system: sys.to_string(),
                out_tsv: None,
            };
            reports.insert((dir, sys), stage("score", evaluate(g, &args))?);
        }
    }

    let _ = writeln!(report, "[evaluation]\n{}", systems_table(&reports));
    for dir in ["src-tgt", "tgt-src"] {
        let systems: Vec<(&str, &EvalReport)> = SYSTEMS.iter().map(|s| (*s, &reports[&(dir, *s)])).collect();
        let _ = writeln!(report, "[per-talk BLEU, {dir}]\n{}", eval::render_table(&systems));
        stage(
            "score",
            write_atomic(&layout.run(&format!("scores.{dir}.tsv")), true, |w| {
                eval::write_report_tsv(&systems, w)
            }),
        )?;
    }

    let report_path = a.workdir.join("report.txt");
    stage("report", write_string(&report_path, true, &report))?;
    Ok(report)
}

fn systems_table(reports: &BTreeMap<(&str, &str), EvalReport>) -> String {
    let mut rows: Vec<[String; 6]> = vec![["LANG", "SYSTEM", "DIRECTION", "BLEU", "NIST", "TER"].map(String::from)];
    for dir in ["src-tgt", "tgt-src"] {
        for sys in SYSTEMS {
            let c = &reports[&(dir, sys)].corpus;
            rows.push([
                "SRC-TGT".into(),
                sys.into(),
                dir.into(),
                format!("{:.2}", 100.0 * c.bleu.score),
                format!("{:.2}", c.nist),
                format!("{:.2}", 100.0 * c.ter),
            ]);
        }
    }
    let widths: Vec<usize> = (0..6)
        .map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for r in &rows {
        let cells: Vec<String> = r
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(c, (v, &w))| if c < 3 { format!("{v:<w$}") } else { format!("{v:>w$}") })
            .collect();
        let _ = writeln!(out, "{}", cells.join("  ").trim_end());
    }
    out
}
