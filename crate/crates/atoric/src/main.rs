//! Command-line front end.
//!
//! Exit codes: 0 success, 1 failed validation or unmet tolerance, 2 usage
//! errors (clap), 3 internal errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand};
use num_complex::Complex64;

use atoric::base::{node_monodromy_steps, standard_lattice, Branch, LoopDirection};
use atoric::coeff::{Coeff, Rational};
use atoric::ingredients::{act_perm, act_sign, ingredients_equivalent, validate_parts, SignVector};
use atoric::io;
use atoric::jets::{Jet2, JetPair};
use atoric::labels::{orbit_normal_form, verify_label};
use atoric::numerics::{extract_relative_series, regularized_action, GridSpec};
use atoric::svg::render_svg;

#[derive(Parser)]
#[command(name = "atoric", version, about = "Invariants of almost-toric systems")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check an ingredient file and print the full report.
    Validate { file: PathBuf },
    /// Check only the label axioms, optionally truncated to a lower order.
    LabelVerify {
        file: PathBuf,
        #[arg(long)]
        order: Option<u32>,
    },
    /// Print the file with every label in its orbit normal form.
    LabelNormalize { file: PathBuf },
    /// Search for an equivalence between two ingredient files.
    Eq {
        file1: PathBuf,
        file2: PathBuf,
        /// Entry bound for the linear part of the witness.
        #[arg(long, default_value_t = 3)]
        bound: i64,
    },
    /// Apply a node permutation or a sign vector to an ingredient.
    #[command(group(ArgGroup::new("action").required(true).args(["perm", "sign"])))]
    Act {
        file: PathBuf,
        /// One-based images, e.g. "2,1" swaps the first two nodes.
        #[arg(long)]
        perm: Option<String>,
        /// One sign per node, e.g. "+,-".
        #[arg(long)]
        sign: Option<String>,
        /// Twisting-index offsets for the sign action; defaults to zeros.
        #[arg(long, conflicts_with = "perm")]
        delta: Option<String>,
    },
    /// Print the standard focus-focus lattice basis at a point.
    Lattice {
        #[arg(long)]
        m: u32,
        /// Base point as "x,y", inside the unit disk.
        #[arg(long)]
        z: String,
        /// Branch winding of the logarithm.
        #[arg(long, default_value_t = 0)]
        winding: i32,
    },
    /// Print the monodromy matrix from numerical continuation.
    Monodromy {
        #[arg(long)]
        m: u32,
        #[arg(long, default_value_t = 3600)]
        steps: u32,
        #[arg(long, default_value_t = 0.5)]
        radius: f64,
    },
    /// Sample a polynomial regularized action on the default grid, extract
    /// the series back, and print the largest coefficient error.
    Roundtrip {
        /// Polynomial in X, Y and t (t stands for pi), e.g. "2tY+X^2".
        #[arg(long)]
        stilde: String,
        /// Extraction order, at most 4.
        #[arg(long)]
        order: u32,
    },
    /// Render the base diagram of an ingredient file to SVG.
    Render {
        file: PathBuf,
        #[arg(short, long)]
        o: PathBuf,
    },
}

enum Failure {
    /// Exit 1: the input is readable but wrong, or a tolerance was missed.
    Validation(String),
    /// Exit 3: the tool itself misbehaved.
    Internal(String),
}

fn validation(msg: impl Into<String>) -> Failure {
    Failure::Validation(msg.into())
}

fn read(path: &PathBuf) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| validation(format!("cannot read {}: {e}", path.display())))
}

fn io_fail(e: io::IoError) -> Failure {
    validation(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| run(cli))) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(Failure::Validation(msg))) => {
            if !msg.is_empty() {
                eprintln!("{msg}");
            }
            ExitCode::from(1)
        }
        Ok(Err(Failure::Internal(msg))) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(3)
        }
        Err(_) => ExitCode::from(3),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.cmd {
        Cmd::Validate { file } => {
            let (base, labels, k) = io::parse_parts(&read(&file)?).map_err(io_fail)?;
            let report = validate_parts(&base, &labels, &k);
            println!("{report}");
            if report.is_valid() {
                Ok(())
            } else {
                Err(validation(String::new()))
            }
        }
        Cmd::LabelVerify { file, order } => {
            let (_, labels, _) = io::parse_parts(&read(&file)?).map_err(io_fail)?;
            let mut all_ok = true;
            for (i, raw) in labels.iter().enumerate() {
                let (s, g) = match order {
                    Some(n) => (
                        truncate_all(&raw.s, n),
                        raw.g.iter().map(|row| truncate_all(row, n)).collect::<Vec<_>>(),
                    ),
                    None => (raw.s.clone(), raw.g.clone()),
                };
                match verify_label(s.len(), &s, &g) {
                    Ok(report) => {
                        println!("label {i}: {report}");
                        all_ok &= report.is_valid();
                    }
                    Err(e) => {
                        println!("label {i}: {e}");
                        all_ok = false;
                    }
                }
            }
            if labels.is_empty() {
                println!("no labels in file");
            }
            if all_ok {
                Ok(())
            } else {
                Err(validation(String::new()))
            }
        }
        Cmd::LabelNormalize { file } => {
            let mut ing = io::parse_ingredient(&read(&file)?).map_err(io_fail)?;
            ing.labels = ing.labels.iter().map(orbit_normal_form).collect();
            print!("{}", io::serialize_ingredient(&ing).map_err(io_fail)?);
            Ok(())
        }
        Cmd::Eq { file1, file2, bound } => {
            let a = io::parse_ingredient(&read(&file1)?).map_err(io_fail)?;
            let b = io::parse_ingredient(&read(&file2)?).map_err(io_fail)?;
            match ingredients_equivalent(&a, &b, bound) {
                Some(g) => {
                    let l = g.linear;
                    println!(
                        "equivalent via [[{},{}],[{},{}]] + ({}, {})",
                        l[0][0], l[0][1], l[1][0], l[1][1], g.translate.0, g.translate.1
                    );
                    Ok(())
                }
                None => {
                    println!("none-within-bound");
                    Err(validation(String::new()))
                }
            }
        }
        Cmd::Act { file, perm, sign, delta } => {
            let ing = io::parse_ingredient_lax(&read(&file)?).map_err(io_fail)?;
            let f = ing.base.nodes.len();
            let result = if let Some(p) = perm {
                let images = parse_ints(&p)?;
                let rho: Vec<usize> = images
                    .iter()
                    .map(|&v| {
                        usize::try_from(v - 1)
                            .map_err(|_| validation(format!("permutation entry {v} is not positive")))
                    })
                    .collect::<Result<_, _>>()?;
                act_perm(&rho, &ing).map_err(|e| validation(e.to_string()))?
            } else {
                let sign = sign.expect("clap guarantees one of perm/sign");
                let sigma = parse_signs(&sign)?;
                let delta_k = match delta {
                    Some(d) => parse_ints(&d)?,
                    None => vec![0; f],
                };
                let sv = SignVector::new(sigma, delta_k).map_err(|e| validation(e.to_string()))?;
                act_sign(&sv, &ing).map_err(|e| validation(e.to_string()))?
            };
            print!("{}", io::serialize_ingredient(&result).map_err(io_fail)?);
            Ok(())
        }
        Cmd::Lattice { m, z, winding } => {
            let (x, y) = parse_point(&z)?;
            let basis = standard_lattice(m, Complex64::new(x, y), Branch { winding })
                .map_err(|e| validation(e.to_string()))?;
            println!("v1 = ({:.12}, {:.12})", basis.v1.0, basis.v1.1);
            println!("v2 = ({:.12}, {:.12})", basis.v2.0, basis.v2.1);
            Ok(())
        }
        Cmd::Monodromy { m, steps, radius } => {
            use atoric::base::BaseError;
            let mat = node_monodromy_steps(m, LoopDirection::Ccw, radius, steps).map_err(|e| {
                match e {
                    BaseError::MonodromyNotIntegral { .. } => Failure::Internal(e.to_string()),
                    _ => validation(e.to_string()),
                }
            })?;
            println!("[[{},{}],[{},{}]]", mat[0][0], mat[0][1], mat[1][0], mat[1][1]);
            Ok(())
        }
        Cmd::Roundtrip { stilde, order } => {
            let jet = parse_poly(&stilde, order).map_err(validation)?;
            if !jet.get(0, 0).is_zero() {
                return Err(validation("the action polynomial must have no constant term"));
            }
            let charts = vec![JetPair::identity(jet.order())];
            let grid = GridSpec::default();
            let sampled =
                regularized_action(&jet, &charts, &grid).map_err(|e| validation(e.to_string()))?;
            let series = extract_relative_series(&sampled, &charts, order)
                .map_err(|e| validation(e.to_string()))?;
            let mut worst: f64 = 0.0;
            for p in 0..=order {
                for q in 0..=(order - p) {
                    let got = series.rep().get(p, q).eval_f64();
                    let want = jet.get(p, q).eval_f64();
                    worst = worst.max((got - want).abs());
                }
            }
            println!("max coefficient error: {worst:.3e}");
            let tol = if order <= 2 { 1e-3 } else { 1e-2 };
            if worst < tol {
                Ok(())
            } else {
                Err(validation(format!("error {worst:.3e} exceeds {tol:.0e}")))
            }
        }
        Cmd::Render { file, o } => {
            let base = io::parse_diagram(&read(&file)?).map_err(io_fail)?;
            let svg = render_svg(&base);
            std::fs::write(&o, svg)
                .map_err(|e| validation(format!("cannot write {}: {e}", o.display())))?;
            Ok(())
        }
    }
}

fn truncate_all(jets: &[Jet2], order: u32) -> Vec<Jet2> {
    jets.iter()
        .map(|j| j.truncated(order.min(j.order())).expect("never raises the order"))
        .collect()
}

fn parse_ints(text: &str) -> Result<Vec<i64>, Failure> {
    text.split(',')
        .map(|p| {
            p.trim()
                .parse()
                .map_err(|_| validation(format!("`{}` is not an integer", p.trim())))
        })
        .collect()
}

fn parse_signs(text: &str) -> Result<Vec<i8>, Failure> {
    text.split(',')
        .map(|p| match p.trim() {
            "+" | "+1" => Ok(1),
            "-" | "-1" => Ok(-1),
            other => Err(validation(format!("`{other}` is not a sign (+ or -)"))),
        })
        .collect()
}

fn parse_point(text: &str) -> Result<(f64, f64), Failure> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(validation(format!("`{text}` is not a point x,y")));
    }
    let x = parts[0].trim().parse().map_err(|_| validation(format!("bad abscissa `{}`", parts[0])))?;
    let y = parts[1].trim().parse().map_err(|_| validation(format!("bad ordinate `{}`", parts[1])))?;
    Ok((x, y))
}

/// Tiny polynomial reader for `--stilde`.  Terms are separated by + or -;
/// each is a product of integer or p/q constants and of the letters X, Y, t
/// with optional ^exponent.  The letter t denotes pi, so "2tY" is one action
/// quantum times Y.
fn parse_poly(text: &str, min_order: u32) -> Result<Jet2, String> {
    #[derive(Clone, PartialEq)]
    enum Tok {
        Num(Rational),
        X,
        Y,
        T,
        Caret,
        Plus,
        Minus,
    }
    let mut toks = Vec::new();
    let bytes: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            ' ' | '\t' | '*' => i += 1,
            '+' => {
                toks.push(Tok::Plus);
                i += 1;
            }
            '-' => {
                toks.push(Tok::Minus);
                i += 1;
            }
            '^' => {
                toks.push(Tok::Caret);
                i += 1;
            }
            'X' | 'x' => {
                toks.push(Tok::X);
                i += 1;
            }
            'Y' | 'y' => {
                toks.push(Tok::Y);
                i += 1;
            }
            't' | 'T' => {
                toks.push(Tok::T);
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == '/') {
                    i += 1;
                }
                let lit: String = bytes[start..i].iter().collect();
                let r: Rational =
                    lit.parse().map_err(|_| format!("bad number `{lit}` at position {start}"))?;
                toks.push(Tok::Num(r));
            }
            other => return Err(format!("unexpected character `{other}` at position {i}")),
        }
    }
    if toks.is_empty() {
        return Err("empty polynomial".into());
    }

    // One pi is half the formal period constant.
    let pi = Coeff::tau().scale(&Rational::new(1, 2));
    let mut terms: Vec<(u32, u32, Coeff)> = Vec::new();
    let mut i = 0;
    let mut sign = 1i64;
    // Leading sign.
    while i < toks.len() && matches!(toks[i], Tok::Plus | Tok::Minus) {
        if toks[i] == Tok::Minus {
            sign = -sign;
        }
        i += 1;
    }
    loop {
        let mut coeff = Coeff::from_int(sign);
        let mut px = 0u32;
        let mut py = 0u32;
        let mut any = false;
        while i < toks.len() && !matches!(toks[i], Tok::Plus | Tok::Minus) {
            let factor = toks[i].clone();
            i += 1;
            let mut exp = 1u32;
            if i < toks.len() && toks[i] == Tok::Caret {
                i += 1;
                match toks.get(i) {
                    Some(Tok::Num(r)) if r.is_integer() && r.signum() >= 0 => {
                        exp = r
                            .to_f64()
                            .round() as u32;
                        i += 1;
                    }
                    _ => return Err("^ must be followed by a nonnegative integer".into()),
                }
            }
            match factor {
                Tok::Num(r) => {
                    if exp != 1 {
                        let mut power = Rational::one();
                        for _ in 0..exp {
                            power = power.mul(&r);
                        }
                        coeff = coeff.scale(&power);
                    } else {
                        coeff = coeff.scale(&r);
                    }
                    any = true;
                }
                Tok::X => {
                    px += exp;
                    any = true;
                }
                Tok::Y => {
                    py += exp;
                    any = true;
                }
                Tok::T => {
                    for _ in 0..exp {
                        coeff = coeff.mul(&pi);
                    }
                    any = true;
                }
                Tok::Caret | Tok::Plus | Tok::Minus => unreachable!("consumed above"),
            }
        }
        if !any {
            return Err("term with no factors".into());
        }
        terms.push((px, py, coeff));
        if i >= toks.len() {
            break;
        }
        sign = 1;
        let mut saw_sep = false;
        while i < toks.len() && matches!(toks[i], Tok::Plus | Tok::Minus) {
            if toks[i] == Tok::Minus {
                sign = -sign;
            }
            saw_sep = true;
            i += 1;
        }
        if !saw_sep || i >= toks.len() {
            return Err("dangling sign at end of polynomial".into());
        }
    }

    let degree = terms.iter().map(|(p, q, _)| p + q).max().unwrap_or(0);
    let mut jet = Jet2::zero(degree.max(min_order));
    for (p, q, c) in terms {
        let merged = jet.get(p, q).add(&c);
        jet.set(p, q, merged).expect("degree within computed order");
    }
    Ok(jet)
}
