//! Synthetic NSL-KDD-format corpus generator.
//!
//! The real NSL-KDD files are not redistributable with this repository, so
//! this module produces stand-in traffic files in the exact same format:
//! 41 features, a label, and a difficulty column. Each of the ten DoS/U2R
//! attacks gets a distinct signature over the features it is known for
//! (SYN-flood error rates for neptune, `ecr_i` floods for smurf, fragment
//! counts for teardrop, shell/root activity for the U2R family, ...), and a
//! couple of non-catalog labels plus test-only service names are mixed in so
//! downstream filtering and unseen-category encoding get exercised. Output is
//! fully determined by the seed.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rand::prelude::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dataset::ClassCounts;

/// Which corpus file a record is generated for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Train,
    Test,
}

/// Per-class record counts for the generated train and test files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthSpec {
    pub seed: u64,
    pub train_counts: ClassCounts,
    pub test_counts: ClassCounts,
}

impl Default for SynthSpec {
    /// Pool sizes mirror the availability pattern of the public files: the
    /// rare attacks exist in exactly the numbers the default
    /// [`DatasetSpec`](super::DatasetSpec) draws, the common ones in excess.
    fn default() -> Self {
        let train = [
            ("normal", 4500),
            ("neptune", 1200),
            ("back", 700),
            ("smurf", 900),
            ("teardrop", 700),
            ("pod", 201),
            ("land", 18),
            ("buffer_overflow", 30),
            ("loadmodule", 9),
            ("perl", 3),
            ("rootkit", 10),
            ("ipsweep", 120),
            ("warezclient", 40),
        ];
        let test = [
            ("normal", 4300),
            ("neptune", 800),
            ("back", 450),
            ("smurf", 500),
            ("teardrop", 12),
            ("pod", 41),
            ("land", 7),
            ("buffer_overflow", 20),
            ("loadmodule", 2),
            ("perl", 2),
            ("rootkit", 13),
            ("ipsweep", 60),
            ("warezclient", 20),
        ];
        SynthSpec {
            seed: 42,
            train_counts: train.iter().map(|(c, n)| (c.to_string(), *n)).collect(),
            test_counts: test.iter().map(|(c, n)| (c.to_string(), *n)).collect(),
        }
    }
}

const TCP_SERVICES: [&str; 14] = [
    "http", "smtp", "ftp_data", "ftp", "telnet", "pop_3", "private", "other", "auth", "finger",
    "imap4", "ssh", "irc", "X11",
];
const UDP_SERVICES: [&str; 4] = ["domain_u", "ntp_u", "time", "echo"];
/// Services present only in generated test files, never in train files.
const TEST_ONLY_SERVICES: [&str; 2] = ["red_i", "tim_i"];

/// Positions holding two-decimal rate values.
fn is_rate_position(pos: usize) -> bool {
    (24..=30).contains(&pos) || (33..=40).contains(&pos)
}

struct Tokens([String; 41]);

impl Tokens {
    fn new() -> Self {
        let mut tokens: [String; 41] = std::array::from_fn(|_| String::from("0"));
        for (pos, t) in tokens.iter_mut().enumerate() {
            if is_rate_position(pos) {
                *t = String::from("0.00");
            }
        }
        Tokens(tokens)
    }

    fn int(&mut self, pos: usize, value: u64) {
        self.0[pos] = value.to_string();
    }

    fn rate(&mut self, pos: usize, value: f64) {
        self.0[pos] = format!("{:.2}", value.clamp(0.0, 1.0));
    }

    fn cat(&mut self, pos: usize, value: &str) {
        self.0[pos] = value.to_string();
    }

    fn join(&self) -> String {
        self.0.join(",")
    }
}

fn pick<'a>(rng: &mut ChaCha8Rng, choices: &'a [&'a str]) -> &'a str {
    choices.choose(rng).expect("non-empty choice list")
}

fn chance(rng: &mut ChaCha8Rng, p: f64) -> bool {
    rng.random::<f64>() < p
}

fn int_in(rng: &mut ChaCha8Rng, lo: u64, hi: u64) -> u64 {
    rng.random_range(lo..=hi)
}

fn rate_in(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..=hi)
}

/// Shared destination-host block for unremarkable traffic.
fn benign_host_block(t: &mut Tokens, rng: &mut ChaCha8Rng) {
    let host_count = int_in(rng, 1, 255);
    t.int(31, host_count);
    t.int(32, int_in(rng, 1, host_count));
    t.rate(33, rate_in(rng, 0.4, 1.0));
    t.rate(34, rate_in(rng, 0.0, 0.15));
    t.rate(35, rate_in(rng, 0.0, 0.3));
    t.rate(36, rate_in(rng, 0.0, 0.1));
    t.rate(37, rate_in(rng, 0.0, 0.05));
    t.rate(38, rate_in(rng, 0.0, 0.05));
    t.rate(39, rate_in(rng, 0.0, 0.05));
    t.rate(40, rate_in(rng, 0.0, 0.05));
}

fn gen_normal(t: &mut Tokens, rng: &mut ChaCha8Rng, role: Role) {
    let proto = pick(
        rng,
        &[
            "tcp", "tcp", "tcp", "tcp", "tcp", "tcp", "udp", "udp", "icmp",
        ],
    );
    t.cat(1, proto);
    let service = match proto {
        "tcp" => {
            if chance(rng, 0.45) {
                "http"
            } else {
                pick(rng, &TCP_SERVICES)
            }
        }
        "udp" => pick(rng, &UDP_SERVICES),
        _ => "eco_i",
    };
    // A sliver of test-file normals use services the train file never saw.
    if role == Role::Test && chance(rng, 0.015) {
        t.cat(2, pick(rng, &TEST_ONLY_SERVICES));
    } else {
        t.cat(2, service);
    }
    t.cat(
        3,
        pick(
            rng,
            &[
                "SF", "SF", "SF", "SF", "SF", "SF", "SF", "REJ", "RSTR", "S1",
            ],
        ),
    );
    if chance(rng, 0.4) {
        t.int(0, int_in(rng, 1, 500));
    }
    t.int(4, int_in(rng, 45, 8000));
    if !chance(rng, 0.2) {
        t.int(5, int_in(rng, 100, 20000));
    }
    if chance(rng, 0.05) {
        t.int(9, int_in(rng, 1, 2)); // hot
    }
    if proto == "tcp" && chance(rng, 0.7) {
        t.int(11, 1); // logged_in
    }
    if chance(rng, 0.05) {
        // Bursty-but-legitimate traffic; keeps the normal class from being
        // trivially separable from the flooding attacks.
        t.int(22, int_in(rng, 80, 400));
        t.int(23, int_in(rng, 1, 60));
        t.rate(24, rate_in(rng, 0.3, 0.9));
        t.rate(25, rate_in(rng, 0.3, 0.9));
        t.rate(28, rate_in(rng, 0.05, 0.4));
        t.rate(37, rate_in(rng, 0.2, 0.8));
        t.rate(38, rate_in(rng, 0.2, 0.8));
    } else {
        let count = int_in(rng, 1, 30);
        t.int(22, count);
        t.int(23, int_in(rng, 1, count + 5));
        if chance(rng, 0.1) {
            t.rate(24, rate_in(rng, 0.0, 0.2));
        }
        if chance(rng, 0.08) {
            t.rate(26, rate_in(rng, 0.0, 0.3));
        }
    }
    t.rate(28, rate_in(rng, 0.7, 1.0));
    t.rate(29, rate_in(rng, 0.0, 0.2));
    t.rate(30, rate_in(rng, 0.0, 0.3));
    benign_host_block(t, rng);
}

fn gen_neptune(t: &mut Tokens, rng: &mut ChaCha8Rng) {
    t.cat(1, "tcp");
    t.cat(
        2,
        if chance(rng, 0.7) {
            "private"
        } else {
            pick(rng, &["other", "telnet", "finger", "http"])
        },
    );
    let rejected = chance(rng, 0.1);
    t.cat(3, if rejected { "REJ" } else { "S0" });
    t.int(22, int_in(rng, 80, 511));
    t.int(23, int_in(rng, 1, 20));
    if rejected {
        t.rate(26, rate_in(rng, 0.9, 1.0));
        t.rate(27, rate_in(rng, 0.9, 1.0));
        t.rate(39, rate_in(rng, 0.9, 1.0));
        t.rate(40, rate_in(rng, 0.9, 1.0));
    } else {
        t.rate(24, rate_in(rng, 0.9, 1.0));
        t.rate(25, rate_in(rng, 0.9, 1.0));
        t.rate(37, rate_in(rng, 0.9, 1.0));
        t.rate(38, rate_in(rng, 0.9, 1.0));
    }
    t.rate(28, rate_in(rng, 0.0, 0.12));
    t.rate(29, rate_in(rng, 0.05, 0.2));
    t.int(31, 255);
    t.int(32, int_in(rng, 1, 30));
    t.rate(33, rate_in(rng, 0.0, 0.12));
    t.rate(34, rate_in(rng, 0.05, 0.2));
}

fn gen_smurf(t: &mut Tokens, rng: &mut ChaCha8Rng) {
    t.cat(1, "icmp");
    t.cat(2, "ecr_i");
    t.cat(3, "SF");
    t.int(4, *[520, 1032].choose(rng).unwrap() + int_in(rng, 0, 16));
    let count = int_in(rng, 200, 511);
    t.int(22, count);
    t.int(23, count - int_in(rng, 0, 20));
    t.rate(28, 1.0);
    t.int(31, 255);
    t.int(32, int_in(rng, 200, 255));
    t.rate(33, 1.0);
    t.rate(35, rate_in(rng, 0.8, 1.0));
}

fn gen_back(t: &mut Tokens, rng: &mut ChaCha8Rng) {
    t.cat(1, "tcp");
    t.cat(2, "http");
    t.cat(3, if chance(rng, 0.8) { "SF" } else { "RSTR" });
    t.int(0, int_in(rng, 0, 5));
    t.int(4, int_in(rng, 50000, 60000));
    t.int(5, int_in(rng, 2000, 10000));
    t.int(11, 1);
    if chance(rng, 0.3) {
        t.int(9, int_in(rng, 1, 2));
    }
    let count = int_in(rng, 2, 10);
    t.int(22, count);
    t.int(23, count);
    t.rate(28, 1.0);
    t.int(31, 255);
    t.int(32, int_in(rng, 200, 255));
    t.rate(33, 1.0);
    t.rate(
        39,
        if chance(rng, 0.5) {
            rate_in(rng, 0.0, 0.1)
        } else {
            0.0
        },
    );
}

fn gen_teardrop(t: &mut Tokens, rng: &mut ChaCha8Rng) {
    t.cat(1, "udp");
    t.cat(2, "private");
    t.cat(3, "SF");
    t.int(4, 28);
    t.int(7, 3); // wrong_fragment
    let count = int_in(rng, 30, 120);
    t.int(22, count);
    t.int(23, count);
    t.rate(28, 1.0);
    t.int(31, int_in(rng, 3, 100));
    t.int(32, int_in(rng, 3, 100));
    t.rate(33, 1.0);
    t.rate(35, rate_in(rng, 0.3, 1.0));
}

fn gen_pod(t: &mut Tokens, rng: &mut ChaCha8Rng) {
    t.cat(1, "icmp");
    t.cat(2, if chance(rng, 0.8) { "ecr_i" } else { "eco_i" });
    t.cat(3, "SF");
    t.int(4, int_in(rng, 1480, 1580));
    t.int(7, 1); // wrong_fragment
    let count = int_in(rng, 1, 20);
    t.int(22, count);
    t.int(23, count);
    t.rate(28, 1.0);
    t.int(31, int_in(rng, 2, 120));
    t.int(32, int_in(rng, 2, 120));
    t.rate(33, 1.0);
}

fn gen_land(t: &mut Tokens, rng: &mut ChaCha8Rng) {
    t.cat(1, "tcp");
    t.cat(2, pick(rng, &["finger", "telnet", "http"]));
    t.cat(3, "S0");
    t.int(6, 1); // land
    t.int(22, int_in(rng, 1, 5));
    t.int(23, int_in(rng, 1, 5));
    t.rate(24, rate_in(rng, 0.9, 1.0));
    t.rate(25, rate_in(rng, 0.9, 1.0));
    t.rate(28, 1.0);
    t.int(31, int_in(rng, 1, 20));
    t.int(32, int_in(rng, 1, 5));
    t.rate(37, rate_in(rng, 0.5, 1.0));
}

fn gen_buffer_overflow(t: &mut Tokens, rng: &mut ChaCha8Rng) {
    t.cat(1, "tcp");
    t.cat(2, if chance(rng, 0.7) { "telnet" } else { "ftp" });
    t.cat(3, "SF");
    t.int(0, int_in(rng, 60, 1200));
    t.int(4, int_in(rng, 500, 7000));
    t.int(5, int_in(rng, 300, 9000));
    let stealthy = chance(rng, 0.25);
    if !stealthy {
        t.int(9, int_in(rng, 1, 4)); // hot
    }
    t.int(11, 1);
    if !stealthy && chance(rng, 0.8) {
        t.int(13, 1); // root_shell
    }
    if chance(rng, 0.2) {
        t.int(8, int_in(rng, 1, 3)); // urgent
    }
    t.int(12, int_in(rng, 0, 2)); // num_compromised
    t.int(16, int_in(rng, 1, 4)); // num_file_creations
    t.int(17, int_in(rng, 0, 1)); // num_shells
    t.int(22, int_in(rng, 1, 4));
    t.int(23, int_in(rng, 1, 4));
    t.rate(28, 1.0);
    t.int(31, int_in(rng, 1, 10));
    t.int(32, int_in(rng, 1, 10));
}

fn gen_loadmodule(t: &mut Tokens, rng: &mut ChaCha8Rng) {
    t.cat(1, "tcp");
    t.cat(
        2,
        if chance(rng, 0.6) {
            "telnet"
        } else {
            "ftp_data"
        },
    );
    t.cat(3, "SF");
    t.int(0, int_in(rng, 30, 600));
    t.int(4, int_in(rng, 200, 2000));
    t.int(5, int_in(rng, 100, 1500));
    t.int(11, 1);
    if chance(rng, 0.6) {
        t.int(13, 1);
    }
    t.int(15, int_in(rng, 1, 3)); // num_root
    t.int(16, int_in(rng, 1, 3));
    t.int(18, int_in(rng, 0, 2)); // num_access_files
    t.int(22, int_in(rng, 1, 3));
    t.int(23, int_in(rng, 1, 3));
    t.rate(28, 1.0);
    t.int(31, int_in(rng, 1, 8));
    t.int(32, int_in(rng, 1, 8));
}

fn gen_perl(t: &mut Tokens, rng: &mut ChaCha8Rng) {
    t.cat(1, "tcp");
    t.cat(2, "telnet");
    t.cat(3, "SF");
    t.int(0, int_in(rng, 20, 200));
    t.int(4, int_in(rng, 1000, 1500));
    t.int(5, int_in(rng, 200, 800));
    t.int(11, 1);
    t.int(13, 1);
    t.int(15, int_in(rng, 1, 2));
    t.int(16, int_in(rng, 0, 2));
    t.int(17, 1); // num_shells
    t.int(22, int_in(rng, 1, 3));
    t.int(23, int_in(rng, 1, 3));
    t.rate(28, 1.0);
    t.int(31, int_in(rng, 1, 6));
    t.int(32, int_in(rng, 1, 6));
}

fn gen_rootkit(t: &mut Tokens, rng: &mut ChaCha8Rng) {
    t.cat(1, "tcp");
    t.cat(2, pick(rng, &["telnet", "telnet", "ftp", "ftp_data"]));
    t.cat(3, "SF");
    t.int(0, int_in(rng, 10, 800));
    t.int(4, int_in(rng, 100, 4000));
    t.int(5, int_in(rng, 0, 2000));
    if chance(rng, 0.7) {
        t.int(11, 1);
    }
    let quiet = chance(rng, 0.3);
    if !quiet && chance(rng, 0.5) {
        t.int(13, 1);
    }
    t.int(
        15,
        if quiet {
            int_in(rng, 0, 1)
        } else {
            int_in(rng, 1, 6)
        },
    );
    t.int(16, int_in(rng, 0, 4));
    t.int(18, int_in(rng, 0, 2));
    if chance(rng, 0.4) {
        t.int(9, int_in(rng, 1, 3));
    }
    t.int(22, int_in(rng, 1, 5));
    t.int(23, int_in(rng, 1, 5));
    t.rate(28, 1.0);
    t.int(31, int_in(rng, 1, 12));
    t.int(32, int_in(rng, 1, 12));
}

/// Probe traffic outside the ten-attack catalog; exercises label filtering.
fn gen_ipsweep(t: &mut Tokens, rng: &mut ChaCha8Rng) {
    t.cat(1, "icmp");
    t.cat(2, "eco_i");
    t.cat(3, "SF");
    t.int(4, int_in(rng, 8, 20));
    t.int(22, int_in(rng, 1, 6));
    t.int(23, int_in(rng, 1, 6));
    t.rate(28, 1.0);
    t.rate(30, rate_in(rng, 0.5, 1.0));
    t.int(31, int_in(rng, 100, 255));
    t.int(32, int_in(rng, 1, 10));
    t.rate(36, rate_in(rng, 0.5, 1.0));
}

/// R2L traffic outside the catalog.
fn gen_warezclient(t: &mut Tokens, rng: &mut ChaCha8Rng) {
    t.cat(1, "tcp");
    t.cat(2, if chance(rng, 0.5) { "ftp" } else { "ftp_data" });
    t.cat(3, "SF");
    t.int(0, int_in(rng, 0, 3000));
    t.int(4, int_in(rng, 400, 30000));
    t.int(5, int_in(rng, 0, 5000));
    t.int(9, int_in(rng, 1, 30)); // hot
    t.int(11, 1);
    t.int(21, 1); // is_guest_login
    t.int(22, int_in(rng, 1, 8));
    t.int(23, int_in(rng, 1, 8));
    t.rate(28, 1.0);
    benign_host_block(t, rng);
}

/// Fragmented-burst traffic that legitimate monitoring and several DoS
/// attacks both produce, on a shared intensity scale. Normal traffic is
/// dense at the calm end, attack traffic at the aggressive end, and the
/// middle genuinely overlaps, so every trained boundary falls where local
/// class mass puts it and measured rates stay away from 0 and 100.
fn gen_gray_zone(t: &mut Tokens, rng: &mut ChaCha8Rng, intensity: f64) {
    let u = intensity.clamp(0.0, 1.0);
    let spread = |rng: &mut ChaCha8Rng, base: f64, width: f64| {
        (base + width * rng.random_range(-0.08..0.08)).clamp(0.0, 1.0)
    };
    t.cat(1, "udp");
    t.cat(2, "private");
    t.cat(3, "SF");
    t.int(4, int_in(rng, 20, 60));
    t.int(7, if u < 0.5 { 1 } else { 2 }); // wrong_fragment
    let count = 20.0 + 280.0 * spread(rng, u, 1.0);
    t.int(22, count as u64);
    t.int(23, (count as u64).saturating_sub(int_in(rng, 0, 10)).max(1));
    t.rate(28, rate_in(rng, 0.8, 1.0));
    t.int(31, (20.0 + 200.0 * spread(rng, u, 1.0)) as u64);
    t.int(32, (10.0 + 150.0 * spread(rng, u, 1.0)) as u64);
    t.rate(33, rate_in(rng, 0.6, 1.0));
    t.rate(35, spread(rng, 0.2 + 0.7 * u, 1.0));
}

/// Intensity skewed toward the calm end (for gray normals). Legitimate
/// bursts never reach the most aggressive band, which keeps the pairwise
/// models' false positives bounded while the middle stays contested.
fn calm_intensity(rng: &mut ChaCha8Rng) -> f64 {
    let r = rng.random_range(0.0..1.0f64);
    0.85 * r * r
}

/// Intensity skewed toward the aggressive end (for gray attacks).
fn aggressive_intensity(rng: &mut ChaCha8Rng) -> f64 {
    let r = rng.random_range(0.0..1.0f64);
    1.0 - r * r * r
}

fn generate_line(class: &str, role: Role, rng: &mut ChaCha8Rng) -> String {
    let mut t = Tokens::new();
    match class {
        // A slice of normal traffic sits in the gray zone; a slice of the
        // flooding attacks hides in plain normal traffic. Everything else
        // keeps its signature.
        "normal" if chance(rng, 0.07) => {
            let u = calm_intensity(rng);
            gen_gray_zone(&mut t, rng, u)
        }
        "normal" => gen_normal(&mut t, rng, role),
        "neptune" if chance(rng, 0.04) => gen_normal(&mut t, rng, role),
        "neptune" => gen_neptune(&mut t, rng),
        "smurf" if chance(rng, 0.03) => gen_normal(&mut t, rng, role),
        "smurf" => gen_smurf(&mut t, rng),
        "back" if chance(rng, 0.16) => {
            let u = aggressive_intensity(rng);
            gen_gray_zone(&mut t, rng, u)
        }
        "back" => gen_back(&mut t, rng),
        "teardrop" if chance(rng, 0.35) => {
            let u = aggressive_intensity(rng);
            gen_gray_zone(&mut t, rng, u)
        }
        "teardrop" => gen_teardrop(&mut t, rng),
        "pod" if chance(rng, 0.45) => {
            let u = aggressive_intensity(rng);
            gen_gray_zone(&mut t, rng, u)
        }
        "pod" => gen_pod(&mut t, rng),
        "land" => gen_land(&mut t, rng),
        "buffer_overflow" => gen_buffer_overflow(&mut t, rng),
        "loadmodule" => gen_loadmodule(&mut t, rng),
        "perl" => gen_perl(&mut t, rng),
        "rootkit" => gen_rootkit(&mut t, rng),
        "ipsweep" => gen_ipsweep(&mut t, rng),
        "warezclient" => gen_warezclient(&mut t, rng),
        other => panic!("no generator for class {other:?}"),
    }
    let difficulty = int_in(rng, 1, 21);
    format!("{},{},{}", t.join(), class, difficulty)
}

/// Generates the content of one corpus file: the requested number of records
/// per class, shuffled into a single stream. Deterministic in the seed.
pub fn generate_file(spec: &SynthSpec, role: Role) -> String {
    let counts = match role {
        Role::Train => &spec.train_counts,
        Role::Test => &spec.test_counts,
    };
    let role_bit = match role {
        Role::Train => 0,
        Role::Test => 1,
    };
    let mut lines = Vec::new();
    for (class_pos, (class, count)) in counts.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(1_000 + class_pos as u64 * 2 + role_bit);
        for _ in 0..*count {
            lines.push(generate_line(class, role, &mut rng));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(900 + role_bit);
    use rand::seq::SliceRandom;
    lines.shuffle(&mut rng);
    let mut text = lines.join("\n");
    text.push('\n');
    text
}

/// Writes `synth_train.txt` and `synth_test.txt` under `dir`, creating it if
/// needed. Returns the two paths.
pub fn write_corpus(spec: &SynthSpec, dir: &Path) -> io::Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir)?;
    let train_path = dir.join("synth_train.txt");
    let test_path = dir.join("synth_test.txt");
    fs::write(&train_path, generate_file(spec, Role::Train))?;
    fs::write(&test_path, generate_file(spec, Role::Test))?;
    Ok((train_path, test_path))
}

/// Per-class counts needed as a minimum by a dataset spec, used to check a
/// generated corpus can cover it.
pub fn covers(spec: &SynthSpec, train_needs: &ClassCounts, test_needs: &ClassCounts) -> bool {
    if train_needs
        .iter()
        .any(|(c, n)| spec.train_counts.get(c).copied().unwrap_or(0) < *n)
    {
        return false;
    }
    // Test needs may fall back to unused train records.
    test_needs.iter().all(|(c, n)| {
        let test_have = spec.test_counts.get(c).copied().unwrap_or(0);
        let train_spare = spec.train_counts.get(c).copied().unwrap_or(0)
            - train_needs.get(c).copied().unwrap_or(0);
        test_have + train_spare >= *n
    })
}
