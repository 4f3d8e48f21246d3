//! Command-line front end: `stats`, `tree`, `diversity`, `compare`, `synth`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::diversity::{
    diversity, entropy, island_activity, pairwise_distance, sine_matrix, tag_spectrum,
    SpectrumOwner, TagSpectrum, TauCounting,
};
use crate::error::{EntityKind, Error};
use crate::io::{read_triples, write_matrix, write_tree_dot, write_tree_json, write_triples, TripleFormat};
use crate::model::{build_network, degree_stats, NetworkBuilder, TagNormalization, TripartiteNetwork};
use crate::percolation::{build_tree, FilterGrid, IslandTree};
use crate::projection::{
    correlation_matrix, cosine, top_n, user_item_signature, Attribution, ProjectionOptions, View,
};
use crate::synth::{generate, PlantedConfig};

pub const DEFAULT_TOP_TAGS: usize = 120;
pub const DEFAULT_TOP_ITEMS: usize = 1000;
pub const DEFAULT_TOP_USERS: usize = 1000;

#[derive(Debug, Parser)]
#[command(name = "folknet", version, about = "Analyse user-item-tag networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print network size and ownership statistics.
    Stats(InputArgs),
    /// Build the percolation island tree of one family.
    Tree(TreeArgs),
    /// Print a user's entropy and diversity; export an activity-colored tag tree.
    Diversity(DiversityArgs),
    /// Compare two users by library cosine and tag distance.
    Compare(CompareArgs),
    /// Generate a planted-community corpus.
    Synth(SynthArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Normalization {
    TrimFold,
    Exact,
}

impl From<Normalization> for TagNormalization {
    fn from(n: Normalization) -> Self {
        match n {
            Normalization::TrimFold => TagNormalization::TrimFold,
            Normalization::Exact => TagNormalization::Exact,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Users,
    Items,
    Tags,
}

impl From<Family> for EntityKind {
    fn from(f: Family) -> Self {
        match f {
            Family::Users => EntityKind::User,
            Family::Items => EntityKind::Item,
            Family::Tags => EntityKind::Tag,
        }
    }
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Triples file: one `user item tag` attribution per line.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "tsv")]
    pub format: TripleFormat,
    #[arg(long, value_enum, default_value_t = Normalization::TrimFold)]
    pub normalize_tags: Normalization,
    /// Abort on the first malformed line or rejected event.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long, default_value_t = 0.0)]
    pub phi_start: f64,
    #[arg(long, default_value_t = 0.05)]
    pub phi_step: f64,
    /// Keep only the n most used members (default 120 tags, 1000 items or users).
    #[arg(long)]
    pub top_n: Option<usize>,
    /// Correlate tags and items by presence instead of summed link weights.
    #[arg(long)]
    pub binary_attribution: bool,
    #[arg(long)]
    pub out_json: Option<PathBuf>,
    #[arg(long)]
    pub out_dot: Option<PathBuf>,
    /// Draw single-member islands in the DOT export.
    #[arg(long)]
    pub include_singletons: bool,
}

#[derive(Debug, Args)]
pub struct TreeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value_t = Family::Tags)]
    pub family: Family,
    /// users-via-items, items-via-users, items-via-tags or tags-via-items.
    #[arg(long)]
    pub view: Option<View>,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Also write the correlation matrix as CSV.
    #[arg(long)]
    pub out_matrix: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DiversityArgs {
    #[command(flatten)]
    pub input: InputArgs,
    pub user: String,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Count tags by fractional link weight instead of attributions.
    #[arg(long)]
    pub weighted_tau: bool,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub input: InputArgs,
    pub user1: String,
    pub user2: String,
    #[arg(long)]
    pub weighted_tau: bool,
    #[arg(long)]
    pub binary_attribution: bool,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Generator settings as `key = value` lines.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the config's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "tsv")]
    pub format: TripleFormat,
    /// Also write `tag<TAB>community` lines.
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

/// Command failure, split by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Exit code 1.
    Usage(String),
    /// Exit code 2.
    Data(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(e) => write!(f, "error: {e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Data(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(Error::Io(e))
    }
}

type CliResult<T = ()> = Result<T, CliError>;

pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    match &cli.command {
        Command::Stats(args) => cmd_stats(args, out, err),
        Command::Tree(args) => cmd_tree(args, out, err),
        Command::Diversity(args) => cmd_diversity(args, out, err),
        Command::Compare(args) => cmd_compare(args, out, err),
        Command::Synth(args) => cmd_synth(args, out),
    }
}

fn ingest(args: &InputArgs, err: &mut dyn Write) -> CliResult<TripartiteNetwork> {
    let read = read_triples(&args.input, args.format, args.strict)?;
    for w in &read.warnings {
        writeln!(err, "warning: {w}")?;
    }
    let normalization = args.normalize_tags.into();
    if args.strict {
        let mut builder = NetworkBuilder::new(normalization);
        for event in &read.events {
            builder.push(event)?;
        }
        Ok(builder.finish())
    } else {
        let built = build_network(&read.events, normalization);
        for r in &built.rejected {
            writeln!(err, "warning: {r}")?;
        }
        Ok(built.network)
    }
}

pub fn cmd_stats(args: &InputArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    let net = ingest(args, err)?;
    let s = degree_stats(&net);
    writeln!(out, "users\t{}", s.users)?;
    writeln!(out, "items\t{}", s.items)?;
    writeln!(out, "tags\t{}", s.tags)?;
    writeln!(out, "links\t{}", s.links)?;
    writeln!(out, "ownership_pairs\t{}", s.ownership_pairs)?;
    writeln!(out, "items_per_user\t{:.6}", s.items_per_user)?;
    writeln!(out, "users_per_item\t{:.6}", s.users_per_item)?;
    for t in top_n(&net, EntityKind::Tag, 10) {
        writeln!(out, "tag_usage\t{}\t{}", net.tags().names()[t], s.tag_usage[t])?;
    }
    Ok(())
}

fn default_top_n(family: EntityKind) -> usize {
    match family {
        EntityKind::Tag => DEFAULT_TOP_TAGS,
        EntityKind::Item => DEFAULT_TOP_ITEMS,
        EntityKind::User => DEFAULT_TOP_USERS,
    }
}

fn grid(args: &GridArgs) -> CliResult<FilterGrid> {
    FilterGrid::new(args.phi_start, args.phi_step).map_err(|e| CliError::Usage(e.to_string()))
}

fn projection_options(binary: bool) -> ProjectionOptions {
    ProjectionOptions {
        attribution: if binary {
            Attribution::Binary
        } else {
            Attribution::Summed
        },
        ..Default::default()
    }
}

/// Correlation matrix of the top-n members and its island tree.
fn family_tree(
    net: &TripartiteNetwork,
    view: View,
    args: &GridArgs,
) -> CliResult<(crate::projection::CorrelationMatrix, IslandTree)> {
    let n = args.top_n.unwrap_or_else(|| default_top_n(view.family()));
    if n < 2 {
        return Err(CliError::Usage(format!("--top-n must be at least 2, got {n}")));
    }
    let grid = grid(args)?;
    let members = top_n(net, view.family(), n);
    let c = correlation_matrix(net, view, Some(&members), &projection_options(args.binary_attribution))?;
    let tree = build_tree(&c, &grid);
    Ok((c, tree))
}

pub fn cmd_tree(args: &TreeArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    let family: EntityKind = args.family.into();
    let view = args.view.unwrap_or_else(|| View::default_for(family));
    if view.family() != family {
        return Err(CliError::Usage(format!("view {view} does not apply to {family}s")));
    }
    // validate flags before touching the input
    grid(&args.grid)?;
    let net = ingest(&args.input, err)?;
    let (c, tree) = family_tree(&net, view, &args.grid)?;

    if let Some(path) = &args.out_matrix {
        write_matrix(&c, path)?;
    }
    if let Some(path) = &args.grid.out_json {
        write_tree_json(&tree, None, path)?;
    }
    if let Some(path) = &args.grid.out_dot {
        write_tree_dot(&tree, None, args.grid.include_singletons, path)?;
    }
    let shown = tree.islands().iter().filter(|i| !i.is_singleton()).count();
    writeln!(out, "members\t{}", c.len())?;
    writeln!(out, "levels\t{}", tree.levels().len())?;
    writeln!(out, "islands\t{}", tree.islands().len())?;
    writeln!(out, "non_singleton_islands\t{shown}")?;
    Ok(())
}

fn counting(weighted: bool) -> TauCounting {
    if weighted {
        TauCounting::Weighted
    } else {
        TauCounting::Attributions
    }
}

fn user_id(net: &TripartiteNetwork, name: &str) -> CliResult<usize> {
    Ok(net.users().resolve(name)?)
}

/// Sine matrix over the union of the spectra's tags.
fn spectrum_sine(
    net: &TripartiteNetwork,
    spectra: &[&TagSpectrum],
    binary: bool,
) -> CliResult<crate::diversity::SineMatrix> {
    let mut tags: Vec<usize> = spectra.iter().flat_map(|s| s.counts().keys().copied()).collect();
    tags.sort_unstable();
    tags.dedup();
    let c = correlation_matrix(net, View::TagsViaItems, Some(&tags), &projection_options(binary))?;
    Ok(sine_matrix(&c))
}

pub fn cmd_diversity(args: &DiversityArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    grid(&args.grid)?;
    let net = ingest(&args.input, err)?;
    let user = user_id(&net, &args.user)?;
    let tau = counting(args.weighted_tau);
    let spec = tag_spectrum(&net, SpectrumOwner::User(user), tau)?;
    let sample = tag_spectrum(&net, SpectrumOwner::Sample, tau)?;

    let s = spectrum_sine(&net, &[&spec], args.grid.binary_attribution)?;
    let d = diversity(&spec, &s)?;
    let h = entropy(&spec)?;

    let (_, tree) = family_tree(&net, View::TagsViaItems, &args.grid)?;
    let report = island_activity(&tree, &spec, &sample)?;
    if let Some(path) = &args.grid.out_dot {
        write_tree_dot(&tree, Some(&report), args.grid.include_singletons, path)?;
    }
    if let Some(path) = &args.grid.out_json {
        write_tree_json(&tree, Some(&report), path)?;
    }

    writeln!(out, "user\t{}", args.user)?;
    writeln!(out, "distinct_tags\t{}", spec.counts().len())?;
    writeln!(out, "tag_total\t{}", spec.total())?;
    writeln!(out, "entropy\t{h:.9}")?;
    writeln!(out, "diversity\t{d:.9}")?;
    Ok(())
}

pub fn cmd_compare(args: &CompareArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    let net = ingest(&args.input, err)?;
    let u1 = user_id(&net, &args.user1)?;
    let u2 = user_id(&net, &args.user2)?;
    let cos = cosine(&user_item_signature(&net, u1)?, &user_item_signature(&net, u2)?)?;

    let tau = counting(args.weighted_tau);
    let s1 = tag_spectrum(&net, SpectrumOwner::User(u1), tau)?;
    let s2 = tag_spectrum(&net, SpectrumOwner::User(u2), tau)?;
    let sine = spectrum_sine(&net, &[&s1, &s2], args.binary_attribution)?;

    writeln!(out, "cosine\t{cos:.9}")?;
    match pairwise_distance(&s1, &s2, &sine) {
        Ok(d) => writeln!(out, "distance\t{d:.9}")?,
        Err(Error::UndefinedDistance(_)) => writeln!(out, "distance\tundefined")?,
        Err(e) => return Err(e.into()),
    }
    Ok(())
}

pub fn cmd_synth(args: &SynthArgs, out: &mut dyn Write) -> CliResult {
    let mut config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| Error::File {
                path: path.clone(),
                source,
            })?;
            PlantedConfig::from_kv_str(&text)?
        }
        None => PlantedConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let corpus = generate(&config)?;
    let file = File::create(&args.out).map_err(|source| Error::File {
        path: args.out.clone(),
        source,
    })?;
    write_triples(BufWriter::new(file), &corpus.events, args.format)?;
    if let Some(path) = &args.truth {
        let mut w = BufWriter::new(File::create(path).map_err(|source| Error::File {
            path: path.clone(),
            source,
        })?);
        for (tag, community) in &corpus.truth {
            writeln!(w, "{tag}\t{community}")?;
        }
        w.flush()?;
    }
    writeln!(out, "events\t{}", corpus.events.len())?;
    writeln!(out, "attributions\t{}", corpus.attributions)?;
    writeln!(out, "tags\t{}", corpus.truth.len())?;
    Ok(())
}
