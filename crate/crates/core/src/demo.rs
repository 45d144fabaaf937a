//! A synthetic typed corpus for examples and end-to-end checks.
//!
//! Columns are drawn from twenty domains: ten vocabularies backed by a toy
//! embedding space and per-type score tables, and ten generated formats
//! (dates, timestamps, urls, emails, ip addresses, uuids, product codes,
//! movie ids, phones, quantities). A small fraction of columns carries one foreign value,
//! recorded in the returned ground truth, and vocabulary columns
//! occasionally contain words the embedding space does not know.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::corpus::{sample_columns, Column, Corpus};
use crate::domain::{
    builtin_validators, infer_patterns, make_score_table_fn, sample_centroids, EmbeddingSpace, FnGenerator, FnSpec,
    Registry, RegistryManifest, SpaceSpec,
};
use crate::error::{Error, Result};
use crate::eval::GroundTruth;

pub const SPACE_ID: &str = "demo";

struct Vocab {
    name: &'static str,
    words: &'static [&'static str],
    rare: &'static [&'static str],
}

const VOCABS: [Vocab; 10] = [
    Vocab {
        name: "city",
        words: &[
            "seattle",
            "boston",
            "chicago",
            "denver",
            "austin",
            "portland",
            "dallas",
            "houston",
            "phoenix",
            "atlanta",
            "miami",
            "detroit",
            "memphis",
            "nashville",
            "baltimore",
            "milwaukee",
            "albuquerque",
            "tucson",
            "fresno",
            "sacramento",
            "omaha",
            "oakland",
            "tulsa",
            "cleveland",
            "wichita",
            "tampa",
            "honolulu",
            "anaheim",
            "pittsburgh",
            "cincinnati",
        ],
        rare: &["spokane", "boise", "tacoma"],
    },
    Vocab {
        name: "country",
        words: &[
            "france",
            "germany",
            "italy",
            "spain",
            "portugal",
            "canada",
            "mexico",
            "brazil",
            "argentina",
            "chile",
            "peru",
            "japan",
            "china",
            "india",
            "egypt",
            "kenya",
            "nigeria",
            "morocco",
            "sweden",
            "norway",
            "finland",
            "denmark",
            "poland",
            "austria",
            "greece",
            "turkey",
            "vietnam",
            "thailand",
        ],
        rare: &["bhutan", "malawi"],
    },
    Vocab {
        name: "color",
        words: &[
            "red",
            "blue",
            "green",
            "yellow",
            "purple",
            "pink",
            "brown",
            "black",
            "white",
            "gray",
            "cyan",
            "magenta",
            "violet",
            "indigo",
            "maroon",
            "beige",
            "turquoise",
            "crimson",
            "teal",
            "navy",
            "olive",
        ],
        rare: &["chartreuse", "vermilion"],
    },
    Vocab {
        name: "animal",
        words: &[
            "dog", "cat", "horse", "cow", "sheep", "goat", "pig", "lion", "tiger", "bear", "wolf", "fox", "deer",
            "rabbit", "mouse", "rat", "elephant", "giraffe", "zebra", "monkey", "kangaroo", "koala", "panda", "otter",
            "beaver",
        ],
        rare: &["okapi", "pangolin"],
    },
    Vocab {
        name: "fruit",
        words: &[
            "apple",
            "banana",
            "cherry",
            "grape",
            "lemon",
            "lime",
            "mango",
            "peach",
            "pear",
            "plum",
            "kiwi",
            "papaya",
            "melon",
            "apricot",
            "fig",
            "guava",
            "lychee",
            "coconut",
            "pineapple",
            "raspberry",
            "strawberry",
            "blueberry",
        ],
        rare: &["durian", "rambutan"],
    },
    Vocab {
        name: "month",
        words: &[
            "january",
            "february",
            "march",
            "april",
            "may",
            "june",
            "july",
            "august",
            "september",
            "october",
            "november",
            "december",
        ],
        rare: &[],
    },
    Vocab {
        name: "weekday",
        words: &[
            "monday",
            "tuesday",
            "wednesday",
            "thursday",
            "friday",
            "saturday",
            "sunday",
        ],
        rare: &[],
    },
    Vocab {
        name: "instrument",
        words: &[
            "piano",
            "guitar",
            "violin",
            "cello",
            "flute",
            "trumpet",
            "drums",
            "harp",
            "clarinet",
            "saxophone",
            "trombone",
            "oboe",
            "banjo",
            "ukulele",
            "accordion",
            "harmonica",
            "bassoon",
            "tuba",
        ],
        rare: &["theremin", "sitar"],
    },
    Vocab {
        name: "sport",
        words: &[
            "soccer",
            "tennis",
            "golf",
            "baseball",
            "basketball",
            "hockey",
            "cricket",
            "rugby",
            "boxing",
            "swimming",
            "cycling",
            "rowing",
            "skiing",
            "surfing",
            "volleyball",
            "badminton",
            "fencing",
            "archery",
            "wrestling",
        ],
        rare: &["curling", "hurling"],
    },
    Vocab {
        name: "element",
        words: &[
            "hydrogen",
            "helium",
            "lithium",
            "carbon",
            "nitrogen",
            "oxygen",
            "fluorine",
            "neon",
            "sodium",
            "magnesium",
            "aluminum",
            "silicon",
            "phosphorus",
            "sulfur",
            "chlorine",
            "argon",
            "potassium",
            "calcium",
            "iron",
            "copper",
            "zinc",
            "silver",
            "gold",
        ],
        rare: &["ytterbium", "hafnium"],
    },
];

const FORMATS: [&str; 10] = [
    "date",
    "timestamp",
    "url",
    "email",
    "ipv4",
    "uuid",
    "product_code",
    "movie_id",
    "phone",
    "quantity",
];

const SITE_WORDS: [&str; 12] = [
    "acme",
    "globex",
    "initech",
    "umbrella",
    "hooli",
    "vandelay",
    "stark",
    "wayne",
    "wonka",
    "tyrell",
    "cyberdyne",
    "soylent",
];
const NAME_WORDS: [&str; 12] = [
    "alex", "sam", "jordan", "taylor", "morgan", "casey", "riley", "jamie", "avery", "quinn", "drew", "reese",
];
const UNITS: [&str; 5] = ["oz", "lb", "kg", "ml", "g"];

fn generate(format: &str, style: usize, rng: &mut ChaCha8Rng) -> String {
    match format {
        "date" => format!(
            "{}/{}/{}",
            rng.gen_range(1..=12),
            rng.gen_range(1..=28),
            rng.gen_range(1990..=2024)
        ),
        "timestamp" => format!(
            "{:04}-{:02}-{:02}T{:02}:{:02}:{:02}Z",
            rng.gen_range(2000..=2024),
            rng.gen_range(1..=12),
            rng.gen_range(1..=28),
            rng.gen_range(0..24),
            rng.gen_range(0..60),
            rng.gen_range(0..60)
        ),
        "url" => format!(
            "https://www.{}{}.com/{}",
            SITE_WORDS.choose(rng).unwrap(),
            rng.gen_range(1..100),
            NAME_WORDS.choose(rng).unwrap()
        ),
        "email" => format!(
            "{}.{}@{}.com",
            NAME_WORDS.choose(rng).unwrap(),
            NAME_WORDS.choose(rng).unwrap(),
            SITE_WORDS.choose(rng).unwrap()
        ),
        "ipv4" => format!(
            "{}.{}.{}.{}",
            rng.gen_range(1..=254),
            rng.gen_range(0..=255),
            rng.gen_range(0..=255),
            rng.gen_range(1..=254)
        ),
        "uuid" => {
            let hex = |rng: &mut ChaCha8Rng, n: usize| -> String {
                (0..n)
                    .map(|_| char::from_digit(rng.gen_range(0..16), 16).unwrap())
                    .collect()
            };
            format!(
                "{}-{}-{}-{}-{}",
                hex(rng, 8),
                hex(rng, 4),
                hex(rng, 4),
                hex(rng, 4),
                hex(rng, 12)
            )
        }
        "product_code" => format!(
            "{}{}-{:04}",
            (b'A' + rng.gen_range(0..26)) as char,
            (b'A' + rng.gen_range(0..26)) as char,
            rng.gen_range(0..10_000)
        ),
        "movie_id" => format!("tt{:07}", rng.gen_range(0..10_000_000)),
        "phone" => format!(
            "({}) {}-{:04}",
            rng.gen_range(200..1000),
            rng.gen_range(200..1000),
            rng.gen_range(0..10_000)
        ),
        "quantity" => format!("{} {}", rng.gen_range(1..1000), UNITS[style % UNITS.len()]),
        other => unreachable!("unknown format {other}"),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemoConfig {
    pub columns: usize,
    pub min_len: usize,
    pub max_len: usize,
    /// Fraction of columns that receive one foreign value.
    pub natural_error_rate: f64,
    /// Per-value probability that a vocabulary column uses a word missing
    /// from the embedding space.
    pub oov_rate: f64,
    pub dimension: usize,
    pub cluster_sigma: f64,
    pub centre_spread: f64,
    pub seed: u64,
}

impl Default for DemoConfig {
    fn default() -> Self {
        DemoConfig {
            columns: 2000,
            min_len: 20,
            max_len: 40,
            natural_error_rate: 0.02,
            oov_rate: 0.002,
            dimension: 16,
            cluster_sigma: 0.5,
            centre_spread: 2.5,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DemoFiles {
    pub train: PathBuf,
    pub test: PathBuf,
    pub test_truth: PathBuf,
    pub manifest: RegistryManifest,
}

pub struct Demo {
    pub corpus: Corpus,
    /// Positions of the naturally occurring foreign values.
    pub truth: GroundTruth,
    pub space: Arc<EmbeddingSpace>,
    /// Score tables standing in for a column-type classifier.
    pub score_tables: Vec<(String, BTreeMap<String, f64>)>,
    /// Domain name per column id.
    pub domains: BTreeMap<String, String>,
}

pub fn domain_names() -> Vec<&'static str> {
    VOCABS.iter().map(|v| v.name).chain(FORMATS).collect()
}

fn draw_value(domain: usize, style: usize, oov_rate: f64, rng: &mut ChaCha8Rng) -> String {
    if domain < VOCABS.len() {
        let v = &VOCABS[domain];
        if !v.rare.is_empty() && rng.gen_bool(oov_rate) {
            v.rare.choose(rng).unwrap().to_string()
        } else {
            v.words.choose(rng).unwrap().to_string()
        }
    } else {
        generate(FORMATS[domain - VOCABS.len()], style, rng)
    }
}

/// Capitalizes vocabulary words in some columns so normalization matters.
fn styled(value: String, capitalize: bool) -> String {
    if !capitalize {
        return value;
    }
    let mut c = value.chars();
    match c.next() {
        Some(first) => first.to_uppercase().chain(c).collect(),
        None => value,
    }
}

pub fn generate_demo(cfg: &DemoConfig) -> Result<Demo> {
    if cfg.min_len == 0 || cfg.max_len < cfg.min_len {
        return Err(Error::Config(format!(
            "bad column lengths {}..={}",
            cfg.min_len, cfg.max_len
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n_domains = VOCABS.len() + FORMATS.len();

    let centre = Normal::new(0.0, cfg.centre_spread).map_err(|e| Error::Config(e.to_string()))?;
    let jitter = Normal::new(0.0, cfg.cluster_sigma).map_err(|e| Error::Config(e.to_string()))?;
    let mut space = EmbeddingSpace::new(SPACE_ID, cfg.dimension);
    let mut score_tables = Vec::new();
    for v in &VOCABS {
        let c: Vec<f64> = (0..cfg.dimension).map(|_| centre.sample(&mut rng)).collect();
        for w in v.words {
            space.insert(*w, c.iter().map(|x| (x + jitter.sample(&mut rng)) as f32).collect());
        }
    }
    for (d, v) in VOCABS.iter().enumerate() {
        let mut scores = BTreeMap::new();
        for w in v.words.iter().chain(v.rare) {
            scores.insert(w.to_string(), rng.gen_range(0.7..1.0));
        }
        for (o, other) in VOCABS.iter().enumerate() {
            if o == d {
                continue;
            }
            for w in other.words {
                if rng.gen_bool(0.3) {
                    scores.insert(w.to_string(), rng.gen_range(0.0..0.3));
                }
            }
        }
        score_tables.push((v.name.to_string(), scores));
    }

    let mut columns = Vec::with_capacity(cfg.columns);
    let mut truth = GroundTruth::default();
    let mut domains = BTreeMap::new();
    for i in 0..cfg.columns {
        let domain = rng.gen_range(0..n_domains);
        let style = rng.gen_range(0..UNITS.len());
        let capitalize = domain < VOCABS.len() && rng.gen_bool(0.3);
        let len = rng.gen_range(cfg.min_len..=cfg.max_len);
        let mut values: Vec<String> = (0..len)
            .map(|_| styled(draw_value(domain, style, cfg.oov_rate, &mut rng), capitalize))
            .collect();
        let name = domain_names()[domain];
        let id = format!("{name}:{i}");
        if rng.gen_bool(cfg.natural_error_rate) {
            let mut other = rng.gen_range(0..n_domains - 1);
            if other >= domain {
                other += 1;
            }
            let pos = rng.gen_range(0..=values.len());
            let foreign_style = rng.gen_range(0..UNITS.len());
            values.insert(pos, draw_value(other, foreign_style, 0.0, &mut rng));
            truth.mark(&id, pos);
        }
        domains.insert(id.clone(), name.to_string());
        columns.push(Column::new(id, values).with_header(name));
    }
    Ok(Demo {
        corpus: Corpus::new(columns)?,
        truth,
        space: Arc::new(space),
        score_tables,
        domains,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemoRegistryOptions {
    pub centroids: usize,
    pub patterns: usize,
    pub seed: u64,
}

impl Default for DemoRegistryOptions {
    fn default() -> Self {
        DemoRegistryOptions {
            centroids: 40,
            patterns: 20,
            seed: 11,
        }
    }
}

impl Demo {
    /// Functions learned against `train`: sampled embedding centroids,
    /// the score tables, inferred patterns and the builtin validators.
    pub fn registry(&self, train: &Corpus, opts: &DemoRegistryOptions) -> Result<Registry> {
        let mut r = Registry::new();
        r.add_space(self.space.clone(), None);
        r.extend(sample_centroids(train, &self.space, opts.centroids, opts.seed)?);
        for (name, scores) in &self.score_tables {
            r.add(make_score_table_fn(
                name,
                scores.iter().map(|(k, v)| (k.clone(), *v)),
                0.0,
            )?);
        }
        r.extend(infer_patterns(train, opts.patterns));
        r.extend(builtin_validators());
        Ok(r)
    }

    /// Ground truth restricted to the columns of `part`.
    pub fn truth_for(&self, part: &Corpus) -> GroundTruth {
        let mut t = GroundTruth::default();
        for c in part.iter() {
            if let Some(e) = self.truth.errors.get(&c.id) {
                t.errors.insert(c.id.clone(), e.clone());
            }
        }
        t
    }

    /// Splits off `heldout` columns and writes both halves, the held-out
    /// ground truth, the embedding file and the score tables under `dir`.
    /// The manifest uses paths relative to `dir`.
    pub fn write_files(
        &self,
        dir: &Path,
        heldout: usize,
        split_seed: u64,
        opts: &DemoRegistryOptions,
    ) -> Result<DemoFiles> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let (train, test) = sample_columns(&self.corpus, heldout, split_seed)?;
        let files = DemoFiles {
            train: dir.join("train.jsonl"),
            test: dir.join("test.jsonl"),
            test_truth: dir.join("test_truth.jsonl"),
            manifest: RegistryManifest::default(),
        };
        train.write_jsonl(&files.train)?;
        test.write_jsonl(&files.test)?;
        self.truth_for(&test).write_jsonl(&files.test_truth)?;

        let emb = dir.join(format!("{SPACE_ID}.vec"));
        let mut w = BufWriter::new(File::create(&emb).map_err(|e| Error::io(&emb, e))?);
        for t in self.space.tokens() {
            let v = self.space.get(t).expect("token present");
            let nums: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
            writeln!(w, "{t} {}", nums.join(" ")).map_err(|e| Error::io(&emb, e))?;
        }
        w.flush().map_err(|e| Error::io(&emb, e))?;

        let mut functions = Vec::new();
        for (name, scores) in &self.score_tables {
            let path = dir.join(format!("scores_{name}.jsonl"));
            let mut w = BufWriter::new(File::create(&path).map_err(|e| Error::io(&path, e))?);
            for (value, score) in scores {
                serde_json::to_writer(&mut w, &serde_json::json!({"value": value, "score": score}))?;
                w.write_all(b"\n").map_err(|e| Error::io(&path, e))?;
            }
            w.flush().map_err(|e| Error::io(&path, e))?;
            functions.push(FnSpec::ScoreTable {
                type_name: name.clone(),
                path: Some(PathBuf::from(format!("scores_{name}.jsonl"))),
                scores: BTreeMap::new(),
                default_score: 0.0,
            });
        }
        let manifest = RegistryManifest {
            spaces: vec![SpaceSpec {
                id: SPACE_ID.into(),
                path: PathBuf::from(format!("{SPACE_ID}.vec")),
                metric: Default::default(),
            }],
            functions,
            generators: vec![
                FnGenerator::SampleCentroids {
                    space: SPACE_ID.into(),
                    k: opts.centroids,
                    seed: opts.seed,
                },
                FnGenerator::InferPatterns { top_k: opts.patterns },
                FnGenerator::BuiltinValidators,
            ],
        };
        Ok(DemoFiles { manifest, ..files })
    }
}
