//! `scenesuggest`: learn, inspect and query placement priors, generate
//! synthetic corpora and evaluate interaction logs.

mod dump;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use scenesuggest_core::corpus::{
    extract_observations, generate_synthetic_corpus, load_corpus_dir, validate_scene, write_corpus_dir, SyntheticSpec,
};
use scenesuggest_core::eval::{evaluate_log, EvalReport};
use scenesuggest_core::geometry::Vec3;
use scenesuggest_core::priors::{learn_priors, load_priors, save_priors, PriorsDb};
use scenesuggest_core::suggest::{ContextQuery, SuggestionEngine};
use scenesuggest_core::{Error, ModelDb, Scene};

#[derive(Parser)]
#[command(name = "scenesuggest", version, about = "Context-driven scene suggestion tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Learn priors from a corpus directory.
    Learn {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Print the priors stored for one category.
    Dump {
        #[arg(long)]
        priors: PathBuf,
        #[arg(long)]
        key: String,
        #[arg(long, value_enum, default_value_t = Family::Support)]
        family: Family,
        #[arg(long)]
        json: bool,
    },
    /// Rank suggestions for a point on a support surface.
    Query {
        #[arg(long)]
        priors: PathBuf,
        #[arg(long)]
        models: PathBuf,
        #[arg(long)]
        scene: PathBuf,
        /// x,y,z
        #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
        pos: Vec3,
        #[arg(long)]
        parent: String,
        /// nx,ny,nz
        #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true, default_value = "0,0,1")]
        normal: Vec3,
        #[arg(long, default_value_t = 10)]
        limit: usize,
        #[arg(long)]
        json: bool,
    },
    /// Mean reciprocal rank and rank distribution of an interaction log.
    Eval {
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Generate a synthetic corpus directory.
    Gen {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Support,
    Face,
    Count,
    Relpos,
    Relorient,
}

fn parse_vec3(s: &str) -> Result<Vec3, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [x, y, z] if parts.iter().all(|v| v.is_finite()) => Ok(Vec3::new(x, y, z)),
        _ => Err(format!("expected three finite numbers x,y,z, got {s:?}")),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Io { .. } => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn print_json(value: &impl serde::Serialize) {
    println!("{}", serde_json::to_string_pretty(value).expect("output serializes"));
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Learn { corpus, out, json } => learn(&corpus, &out, json),
        Command::Dump { priors, key, family, json } => {
            let db = load_priors(&priors)?;
            match dump::dump(&mut std::io::stdout().lock(), &db, &key, family, json) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Error::Io { path: "<stdout>".into(), source: e }),
                _ => Ok(()),
            }
        }
        Command::Query { priors, models, scene, pos, parent, normal, limit, json } => {
            query(&priors, &models, &scene, pos, &parent, normal, limit, json)
        }
        Command::Eval { log, json } => {
            let text = std::fs::read_to_string(&log).map_err(|source| Error::Io { path: log.clone(), source })?;
            let report = evaluate_log(&text);
            if json {
                print_json(&report);
            } else {
                print_report(&report);
            }
            Ok(())
        }
        Command::Gen { spec, n, seed, out, json } => {
            let spec = SyntheticSpec::load(&spec)?;
            let synthetic = generate_synthetic_corpus(&spec, n, seed)?;
            write_corpus_dir(&synthetic.corpus, &out)?;
            if json {
                print_json(&json!({ "scenes": synthetic.corpus.scenes.len(), "out": out }));
            } else {
                println!("wrote {} scenes to {}", synthetic.corpus.scenes.len(), out.display());
            }
            Ok(())
        }
    }
}

fn learn(corpus: &Path, out: &Path, json: bool) -> Result<(), Error> {
    let corpus = load_corpus_dir(corpus)?;
    let obs = extract_observations(&corpus.scenes, &corpus.models, &corpus.taxonomy)?;
    let priors = learn_priors(&obs, &corpus.taxonomy, &corpus.models)?;
    save_priors(&priors, out)?;
    let counts = family_counts(&priors);
    if json {
        print_json(&json!({ "scenes": corpus.scenes.len(), "out": out, "entries": counts }));
    } else {
        println!("learned priors from {} scenes -> {}", corpus.scenes.len(), out.display());
        for (family, n) in &counts {
            println!("  {family:<10} {n}");
        }
    }
    Ok(())
}

fn family_counts(priors: &PriorsDb) -> Vec<(&'static str, usize)> {
    vec![
        ("count", priors.count_histograms().count()),
        ("support", priors.surface_categoricals().count()),
        ("face", priors.face_categoricals().count()),
        ("relpos", priors.rel_pos_entries().count()),
        ("relorient", priors.rel_orient_entries().count()),
    ]
}

#[allow(clippy::too_many_arguments)]
fn query(
    priors: &Path,
    models: &Path,
    scene: &Path,
    pos: Vec3,
    parent: &str,
    normal: Vec3,
    limit: usize,
    json: bool,
) -> Result<(), Error> {
    let priors = load_priors(priors)?;
    let models = ModelDb::load(models)?;
    let text = std::fs::read_to_string(scene).map_err(|source| Error::Io { path: scene.to_path_buf(), source })?;
    let scene_data = Scene::from_json(&text, scene)?;
    validate_scene(&scene_data, &models, scene)?;
    let q = ContextQuery::new(&scene_data, &models, parent, pos, normal)?;
    let suggestions = SuggestionEngine::new(&priors, &models).suggest(&q, limit)?;
    if json {
        print_json(&json!({
            "parentId": q.parent_id,
            "parentCategory": q.parent_category,
            "surfaceType": q.surface_type,
            "suggestions": suggestions,
        }));
        return Ok(());
    }
    println!("query on {} ({}), surface {}", q.parent_id, q.parent_category, q.surface_type);
    println!("{:>4}  {:<16} {:>9} {:>9} {:>9} {:>9}  {:<7} {:>7}", "rank", "category", "score", "occur", "surface", "wpos", "face", "alpha");
    for (i, s) in suggestions.iter().enumerate() {
        println!(
            "{:>4}  {:<16} {:>9.5} {:>9.5} {:>9.5} {:>9.5}  {:<7} {:>6.1}°",
            i + 1,
            s.category,
            s.score,
            s.occurrence,
            s.surface_probability,
            s.position_score,
            s.placement.face.as_str(),
            s.alpha.to_degrees(),
        );
    }
    Ok(())
}

fn print_report(r: &EvalReport) {
    println!("selections:            {}", r.selection_count);
    match &r.mrr {
        Some(m) => println!("MRR (all):             {:.4} = {} over {}", m.value, m.exact, m.count),
        None => println!("MRR (all):             n/a"),
    }
    match &r.mrr_suggestions_only {
        Some(m) => println!("MRR (suggestion list): {:.4} = {} over {}", m.value, m.exact, m.count),
        None => println!("MRR (suggestion list): n/a"),
    }
    let d = &r.rank_distribution;
    println!("rank distribution:     1: {}  2: {}  3: {}  4+: {}", d.first, d.second, d.third, d.fourth_or_lower);
    println!("text queries:          {}", r.text_query_count);
    println!("text selections:       {} ({} excluded, not in last list)", r.text_selection_count, r.excluded_text_selections);
    println!("unranked selections:   {}", r.unranked_selections);
    println!("malformed lines:       {}", r.malformed_lines);
    println!(
        "reference MRR (NOT reproducible, {}): none {:.3}, basic {:.3}, full {:.3}",
        r.reference.note, r.reference.none, r.reference.basic, r.reference.full
    );
}
