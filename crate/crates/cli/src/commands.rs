//! Subcommands. Each returns the process exit status; errors map to 1 in `main`.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use mkcrypt_core::attack::{
    attack_complexity_profile, exhaustive_subset_attack, mitm_randomness_attack, mitm_subset_attack_with,
    MitmConfig, BENCH_CSV_HEADER,
};
use mkcrypt_core::game::{
    mutation_fuzz, run_ind_cca2, Adversary, CoinFlip, Comparison, ExperimentResult, MalleationCase1,
    MalleationCase2, ModifiedScheme, MutationProbe, OriginalScheme, Scheme, SquareMalleation,
    EXPERIMENT_CSV_HEADER, PAIRWISE_PATTERNS, SINGLE_COMPONENT_PATTERNS,
};
use mkcrypt_core::modified::{self, DecryptOutcome};
use mkcrypt_core::numtheory::SequenceParams;
use mkcrypt_core::original;
use mkcrypt_core::BitVector;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::format::{
    parse_bits, parse_integer, CiphertextText, FixedKeyParams, KeyFile, Radix, Role, SchemeTag,
};

pub const EXIT_OK: u8 = 0;
pub const EXIT_REJECT: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "mkcrypt", version, about = "Multiplicative knapsack cryptosystems: keys, attacks and security games")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a key pair.
    Keygen(KeygenArgs),
    /// Encrypt a message under a public key.
    Encrypt(EncryptArgs),
    /// Decrypt a ciphertext with a secret key; prints REJECT on failure.
    Decrypt(DecryptArgs),
    /// Ciphertext-only message recovery from a public key.
    Attack(AttackArgs),
    /// Exhaustive decryption-uniqueness audit of an original-scheme key.
    Audit(AuditArgs),
    /// Play the chosen-ciphertext game and print the result as CSV.
    Game(GameArgs),
    /// Mutate honest modified-scheme ciphertexts and count accepted forgeries.
    Fuzz(FuzzArgs),
    /// Sweep Hamming weights at fixed n and print attack costs as CSV.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct KeygenArgs {
    #[arg(long, value_enum)]
    pub scheme: Option<SchemeTag>,
    /// Message length (original) or randomness length (modified).
    #[arg(long)]
    pub n: Option<usize>,
    /// Bit length of each hidden prime (modified scheme).
    #[arg(long, default_value_t = 16)]
    pub prime_bits: u64,
    /// Bit length of p; the default is the smallest that fits the sequence.
    #[arg(long)]
    pub modulus_bits: Option<u64>,
    /// First sequence term is drawn below 2^first_bits (original scheme).
    #[arg(long, default_value_t = 4)]
    pub first_bits: u64,
    /// Each later term exceeds the running sum by less than 2^slack_bits (original scheme).
    #[arg(long, default_value_t = 4)]
    pub slack_bits: u64,
    /// Use a super-increasing sequence of primes (original scheme).
    #[arg(long)]
    pub coprime: bool,
    /// Let --modulus-bits undercut the sequence product (original scheme).
    #[arg(long)]
    pub allow_overflow: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Build the key from fixed parameters instead of sampling it.
    #[arg(long, conflicts_with_all = ["n", "seed", "scheme"])]
    pub fixed_key: Option<PathBuf>,
    #[arg(long)]
    pub public_out: PathBuf,
    #[arg(long)]
    pub secret_out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EncryptArgs {
    /// Public key file.
    #[arg(long)]
    pub key: PathBuf,
    /// Bit string (original) or integer in [1, p-n-1] (modified).
    #[arg(long)]
    pub message: String,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value_t)]
    pub radix: Radix,
}

#[derive(Debug, Args)]
pub struct DecryptArgs {
    /// Secret key file.
    #[arg(long)]
    pub key: PathBuf,
    /// Whitespace-separated components; read from stdin when absent.
    #[arg(long)]
    pub ciphertext: Option<String>,
    /// Explain rejections on stderr.
    #[arg(long)]
    pub verbose: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AttackStrategy {
    Exhaustive,
    Mitm,
}

#[derive(Debug, Args)]
pub struct AttackArgs {
    /// Public key file.
    #[arg(long)]
    pub key: PathBuf,
    /// Whitespace-separated components; read from stdin when absent.
    #[arg(long)]
    pub ciphertext: Option<String>,
    #[arg(long, value_enum, default_value_t = AttackStrategy::Exhaustive)]
    pub strategy: AttackStrategy,
    /// Left-list size for the meet-in-the-middle search; defaults to n/2.
    #[arg(long)]
    pub split: Option<usize>,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    /// Secret key file of the original scheme.
    #[arg(long)]
    pub key: PathBuf,
    /// Refuse keys with more than this many bits (the scan is 2^n).
    #[arg(long, default_value_t = original::DEFAULT_AUDIT_LIMIT)]
    pub limit: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AdversaryKind {
    CoinFlip,
    Distinguisher,
    Case1,
    Case2,
    Case2SameWeight,
    Square,
    Mutate,
}

#[derive(Debug, Args)]
pub struct GameArgs {
    #[arg(long, value_enum)]
    pub scheme: SchemeTag,
    #[arg(long, value_enum)]
    pub adversary: AdversaryKind,
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
    #[arg(long, default_value_t = 8)]
    pub n: usize,
    #[arg(long, default_value_t = 12)]
    pub prime_bits: u64,
    /// Components the `mutate` adversary replaces (0 = C1', 1 = C1'', 2 = C2).
    #[arg(long, value_delimiter = ',', default_value = "2")]
    pub components: Vec<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct FuzzArgs {
    #[arg(long, default_value_t = 16)]
    pub n: usize,
    #[arg(long, default_value_t = 16)]
    pub prime_bits: u64,
    #[arg(long, default_value_t = 10_000)]
    pub mutations: u64,
    /// Mutations sharing one key pair.
    #[arg(long, default_value_t = 100)]
    pub per_key: u64,
    /// Mutate pairs of components instead of single ones.
    #[arg(long)]
    pub pairwise: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub n: usize,
    /// Hamming weights to sweep; defaults to 1..=n.
    #[arg(long, value_delimiter = ',')]
    pub h: Vec<usize>,
    /// Random instances per weight.
    #[arg(long, default_value_t = 1)]
    pub instances: usize,
    #[arg(long, value_enum, default_value_t = AttackStrategy::Exhaustive)]
    pub strategy: AttackStrategy,
    #[arg(long)]
    pub seed: Option<u64>,
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<u8> {
    match cli.command {
        Command::Keygen(args) => keygen(args, out),
        Command::Encrypt(args) => encrypt(args, out),
        Command::Decrypt(args) => decrypt(args, out),
        Command::Attack(args) => attack(args, out),
        Command::Audit(args) => audit(args, out),
        Command::Game(args) => game(args, out),
        Command::Fuzz(args) => fuzz(args, out),
        Command::Bench(args) => bench(args, out),
    }
}

fn rng_from(seed: Option<u64>) -> ChaCha20Rng {
    match seed {
        Some(seed) => ChaCha20Rng::seed_from_u64(seed),
        None => ChaCha20Rng::from_entropy(),
    }
}

pub fn read_key(path: &Path) -> Result<KeyFile> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    KeyFile::parse(&text).with_context(|| format!("parsing {}", path.display()))
}

fn read_key_with_role(path: &Path, role: Role) -> Result<KeyFile> {
    let key = read_key(path)?;
    ensure!(key.role() == role, "{} holds a {} key; this command needs a {} key", path.display(), key.role().as_str(), role.as_str());
    Ok(key)
}

fn read_ciphertext(arg: Option<String>, scheme: SchemeTag) -> Result<CiphertextText> {
    let text = match arg {
        Some(text) => text,
        None => {
            let mut buf = String::new();
            io::stdin().read_to_string(&mut buf).context("reading ciphertext from stdin")?;
            buf
        }
    };
    CiphertextText::parse(&text, scheme)
}

fn keygen(args: KeygenArgs, out: &mut dyn Write) -> Result<u8> {
    let secret = match &args.fixed_key {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            FixedKeyParams::parse(&text).with_context(|| format!("parsing {}", path.display()))?.into_key()?
        }
        None => {
            let Some(scheme) = args.scheme else { bail!("--scheme is required without --fixed-key") };
            let Some(n) = args.n else { bail!("--n is required without --fixed-key") };
            let mut rng = rng_from(args.seed);
            match scheme {
                SchemeTag::Original => {
                    let params = original::KeyParams {
                        n,
                        modulus_bits: args.modulus_bits,
                        sequence: SequenceParams { first_bits: args.first_bits, slack_bits: args.slack_bits },
                        coprime: args.coprime,
                        allow_overflow: args.allow_overflow,
                    };
                    KeyFile::OriginalSecret(original::keygen(&params, &mut rng)?.1)
                }
                SchemeTag::Modified => {
                    let params = modified::KeyParams { n, prime_bits: args.prime_bits, modulus_bits: args.modulus_bits };
                    KeyFile::ModifiedSecret(modified::keygen(&params, &mut rng)?.1)
                }
            }
        }
    };
    let public = match &secret {
        KeyFile::OriginalSecret(sk) => KeyFile::OriginalPublic(sk.public_key()),
        KeyFile::ModifiedSecret(sk) => KeyFile::ModifiedPublic(sk.public_key()),
        _ => unreachable!("key generation yields secret keys"),
    };
    fs::write(&args.public_out, public.serialize()).with_context(|| format!("writing {}", args.public_out.display()))?;
    fs::write(&args.secret_out, secret.serialize()).with_context(|| format!("writing {}", args.secret_out.display()))?;
    let (n, p) = match &public {
        KeyFile::OriginalPublic(pk) => (pk.n(), pk.modulus()),
        KeyFile::ModifiedPublic(pk) => (pk.n(), pk.modulus()),
        _ => unreachable!(),
    };
    writeln!(out, "scheme={} n={n} p_bits={}", public.scheme().as_str(), p.bits())?;
    Ok(EXIT_OK)
}

fn encrypt(args: EncryptArgs, out: &mut dyn Write) -> Result<u8> {
    let ct = match read_key_with_role(&args.key, Role::Public)? {
        KeyFile::OriginalPublic(pk) => CiphertextText::Original(original::encrypt(&pk, &parse_bits(&args.message)?)?),
        KeyFile::ModifiedPublic(pk) => {
            let m = parse_integer(&args.message)?;
            CiphertextText::Modified(modified::encrypt(&pk, &m, &mut rng_from(args.seed))?)
        }
        _ => unreachable!("role checked"),
    };
    writeln!(out, "{}", ct.render(args.radix))?;
    Ok(EXIT_OK)
}

fn decrypt(args: DecryptArgs, out: &mut dyn Write) -> Result<u8> {
    let key = read_key_with_role(&args.key, Role::Secret)?;
    let ct = read_ciphertext(args.ciphertext, key.scheme())?;
    match (key, ct) {
        (KeyFile::OriginalSecret(sk), CiphertextText::Original(ct)) => {
            let candidates = original::decrypt_all(&sk, &ct)?;
            if candidates.is_empty() {
                if args.verbose {
                    eprintln!("no subset of the secret sequence multiplies to the recovered value");
                }
                writeln!(out, "REJECT")?;
                return Ok(EXIT_REJECT);
            }
            for m in candidates {
                writeln!(out, "{m}")?;
            }
            Ok(EXIT_OK)
        }
        (KeyFile::ModifiedSecret(sk), CiphertextText::Modified(ct)) => match modified::decrypt(&sk, &ct) {
            DecryptOutcome::Message(m) => {
                writeln!(out, "{m}")?;
                Ok(EXIT_OK)
            }
            DecryptOutcome::Rejected(reason) => {
                if args.verbose {
                    eprintln!("rejected: {reason:?}");
                }
                writeln!(out, "REJECT")?;
                Ok(EXIT_REJECT)
            }
        },
        _ => unreachable!("ciphertext parsed for the key's scheme"),
    }
}

fn attack(args: AttackArgs, out: &mut dyn Write) -> Result<u8> {
    let key = read_key_with_role(&args.key, Role::Public)?;
    let ct = read_ciphertext(args.ciphertext, key.scheme())?;
    let config = MitmConfig { split: args.split, ..MitmConfig::default() };
    match (key, ct) {
        (KeyFile::OriginalPublic(pk), CiphertextText::Original(ct)) => {
            let report = match args.strategy {
                AttackStrategy::Exhaustive => exhaustive_subset_attack(&pk, &ct)?,
                AttackStrategy::Mitm => mitm_subset_attack_with(&pk, &ct, &config)?,
            };
            for m in &report.candidates {
                writeln!(out, "{m}")?;
            }
            writeln!(out, "{BENCH_CSV_HEADER}")?;
            writeln!(out, "{}", report.csv_row())?;
        }
        (KeyFile::ModifiedPublic(pk), CiphertextText::Modified(ct)) => {
            ensure!(
                args.strategy == AttackStrategy::Mitm,
                "modified-scheme ciphertexts only support --strategy mitm"
            );
            let rec = mitm_randomness_attack(&pk, &ct, &config)?;
            for (r, m) in rec.randomness.iter().zip(&rec.messages) {
                match m {
                    Some(m) => writeln!(out, "{m} r={r}")?,
                    None => writeln!(out, "- r={r}")?,
                }
            }
            writeln!(out, "n,h,list_entries,n_candidates")?;
            writeln!(out, "{},{},{},{}", pk.n(), rec.h, rec.list_entries, rec.randomness.len())?;
        }
        _ => unreachable!("ciphertext parsed for the key's scheme"),
    }
    Ok(EXIT_OK)
}

fn audit(args: AuditArgs, out: &mut dyn Write) -> Result<u8> {
    let KeyFile::OriginalSecret(sk) = read_key_with_role(&args.key, Role::Secret)? else {
        bail!("audit needs an original-scheme secret key");
    };
    let report = original::completeness_audit(&sk, &sk.public_key(), args.limit)?;
    writeln!(out, "n,messages,unique,collisions,overflows,unique_fraction")?;
    writeln!(
        out,
        "{},{},{},{},{},{:.6}",
        report.n,
        report.messages,
        report.unique,
        report.collisions.len(),
        report.overflows.len(),
        report.unique_fraction()
    )?;
    for c in &report.collisions {
        let ms: Vec<String> = c.messages.iter().map(|m| m.to_string()).collect();
        writeln!(out, "collision,{},{}", c.product, ms.join(" "))?;
    }
    for m in &report.overflows {
        writeln!(out, "overflow,{m}")?;
    }
    Ok(EXIT_OK)
}

fn play<S: Scheme, A: Adversary<S>>(scheme: &S, mut adversary: A, args: &GameArgs) -> Result<ExperimentResult> {
    Ok(run_ind_cca2(scheme, &mut adversary, args.trials, &mut rng_from(args.seed))?)
}

fn game(args: GameArgs, out: &mut dyn Write) -> Result<u8> {
    let result = match args.scheme {
        SchemeTag::Original => {
            let scheme = OriginalScheme::new(args.n);
            match args.adversary {
                AdversaryKind::CoinFlip => play(&scheme, CoinFlip, &args)?,
                AdversaryKind::Distinguisher => play(&scheme, Comparison::default(), &args)?,
                other => bail!("adversary {other:?} targets the modified scheme"),
            }
        }
        SchemeTag::Modified => {
            let scheme = ModifiedScheme::new(args.n, args.prime_bits);
            match args.adversary {
                AdversaryKind::CoinFlip => play(&scheme, CoinFlip, &args)?,
                AdversaryKind::Distinguisher => play(&scheme, Comparison::default(), &args)?,
                AdversaryKind::Case1 => play(&scheme, MalleationCase1::default(), &args)?,
                AdversaryKind::Case2 => play(&scheme, MalleationCase2::new(false), &args)?,
                AdversaryKind::Case2SameWeight => play(&scheme, MalleationCase2::new(true), &args)?,
                AdversaryKind::Square => play(&scheme, SquareMalleation::default(), &args)?,
                AdversaryKind::Mutate => {
                    ensure!(
                        !args.components.is_empty() && args.components.iter().all(|&c| c <= 2),
                        "--components takes indices 0, 1 and 2"
                    );
                    play(&scheme, MutationProbe::new(&args.components), &args)?
                }
            }
        }
    };
    writeln!(out, "{EXPERIMENT_CSV_HEADER}")?;
    writeln!(out, "{}", result.csv_row())?;
    Ok(EXIT_OK)
}

fn fuzz(args: FuzzArgs, out: &mut dyn Write) -> Result<u8> {
    let scheme = ModifiedScheme::new(args.n, args.prime_bits);
    let patterns: &[&[usize]] = if args.pairwise { &PAIRWISE_PATTERNS } else { &SINGLE_COMPONENT_PATTERNS };
    let report = mutation_fuzz(&scheme, args.mutations, args.per_key, patterns, args.seed)?;
    writeln!(out, "seed,mutations,rejected,accepted")?;
    writeln!(out, "{},{},{},{}", args.seed, report.mutations, report.rejected, report.accepted.len())?;
    for f in &report.accepted {
        let components: Vec<String> = f.components.iter().map(|c| c.to_string()).collect();
        writeln!(out, "forgery,{},{},{},{}", f.index, f.batch_seed, f.mutation_seed, components.join("+"))?;
    }
    Ok(EXIT_OK)
}

fn bench(args: BenchArgs, out: &mut dyn Write) -> Result<u8> {
    let n = args.n;
    ensure!(n >= 2, "--n must be at least 2");
    let weights: Vec<usize> = if args.h.is_empty() { (1..=n).collect() } else { args.h.clone() };
    ensure!(weights.iter().all(|&h| (1..=n).contains(&h)), "weights must lie in [1, {n}]");
    let mut rng = rng_from(args.seed);
    let params = original::KeyParams::new(n);
    writeln!(out, "{BENCH_CSV_HEADER},regime")?;
    for &h in &weights {
        let regime = attack_complexity_profile(n, h)?.regime;
        for _ in 0..args.instances {
            let (pk, _) = original::keygen(&params, &mut rng)?;
            let picked = rand::seq::index::sample(&mut rng, n, h).into_vec();
            let m = BitVector::from_indices(n, &picked)?;
            let ct = original::encrypt(&pk, &m)?;
            let report = match args.strategy {
                AttackStrategy::Exhaustive => exhaustive_subset_attack(&pk, &ct)?,
                AttackStrategy::Mitm => mitm_subset_attack_with(&pk, &ct, &MitmConfig::default())?,
            };
            ensure!(report.candidates.contains(&m), "attack missed the planted message {m}");
            writeln!(out, "{},{}", report.csv_row(), regime.as_str())?;
        }
    }
    Ok(EXIT_OK)
}
