//! Command-line front end: thin adapters over the library, CSV/JSON out.

use clap::{Args, Parser, Subcommand};
use quadrix_core::densities::{main_term_and_error, sigma_finite};
use quadrix_core::discrepancy::{
    congruence_index, haar_ball_volume, mean_square_discrepancy, smooth_proxy_decay,
    spectral_gap_bound,
};
use quadrix_core::error::Error;
use quadrix_core::exponents::{norm_lower_exponent, volume_exponent, RootDatum};
use quadrix_core::expsums::{s_k_multiplicative, s_k_multiplicative_float};
use quadrix_core::forms::{CongruenceClass, QuaternaryForm};
use quadrix_core::quadric::{enumerate_solutions_naive, weighted_count};
use quadrix_core::spectral::spectral_sweep;
use quadrix_core::window::Window;
use std::io::Write;
use std::time::Instant;

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "quadrix", version, about = "quaternary quadric counting laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    #[command(flatten)]
    global: Global,
}

#[derive(Args)]
struct Global {
    /// worker threads (orchestration is single-threaded; accepted for
    /// forward compatibility)
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// enumeration safety limit; QUADRIX_WORK_BOUND overrides the default
    #[arg(long, global = true)]
    work_bound: Option<u64>,
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,
    /// output path (stdout when omitted)
    #[arg(long, global = true)]
    out: Option<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Count lattice solutions of N(x) = h^2 against a window
    Count {
        #[arg(long, default_value = "det4")]
        form: String,
        #[arg(long)]
        h: i64,
        #[arg(long, default_value_t = 1)]
        modulus: i64,
        #[arg(long, default_value = "0,0,0,0")]
        residue: String,
        #[arg(long)]
        window: String,
    },
    /// Exponential sums S_k(c; xi) along k = 1..k_max
    Sks {
        #[arg(long, default_value = "det4")]
        form: String,
        #[arg(long)]
        k_max: i64,
        #[arg(long, default_value_t = 1)]
        h: i64,
        #[arg(long, default_value_t = 1)]
        modulus: i64,
        #[arg(long, default_value = "0,0,0,0")]
        residue: String,
        #[arg(long, default_value = "0,0,0,0")]
        c: String,
        /// cross-check the recursive evaluation against the grouped direct
        /// one in exact cyclotomic arithmetic
        #[arg(long, default_value_t = false)]
        verify: bool,
    },
    /// Local density ladder and the finite product
    Densities {
        #[arg(long, default_value = "det4")]
        form: String,
        #[arg(long, default_value_t = 1)]
        modulus: i64,
        #[arg(long)]
        residue: Option<String>,
        #[arg(long, default_value_t = 1)]
        h: i64,
        #[arg(long, default_value_t = 50)]
        q_max: i64,
    },
    /// Count vs product main term along h = p^s
    Maintermscan {
        #[arg(long, default_value = "det4")]
        form: String,
        #[arg(long, default_value_t = 2)]
        p: u64,
        #[arg(long, default_value_t = 5)]
        s_max: u32,
        #[arg(long, default_value_t = 1)]
        modulus: i64,
        #[arg(long)]
        window: String,
    },
    /// Ball volumes, operator norms and reference curves on the tree
    Spectral {
        #[arg(long, default_value_t = 2)]
        p: u64,
        #[arg(long)]
        s: f64,
        #[arg(long, default_value_t = 10)]
        height_max: u32,
    },
    /// Volume exponents and lower-bound exponents per family
    Exponents {
        #[arg(long)]
        family: String,
        #[arg(long)]
        n_max: usize,
    },
    /// Mean-square discrepancy ladder and the conditional gap bound
    Discrepancy {
        #[arg(long, default_value_t = 2)]
        p: u64,
        #[arg(long, default_value_t = 5)]
        s_max: u32,
        #[arg(long, default_value_t = 1)]
        modulus: i64,
        #[arg(long, default_value_t = 0.4)]
        r: f64,
        #[arg(long, default_value_t = 2000)]
        samples: usize,
    },
    /// Smooth-window deviation decay fit
    Proxy {
        #[arg(long, default_value_t = 2)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        modulus: i64,
        #[arg(long)]
        window: String,
        #[arg(long, default_value_t = 6)]
        s_max: u32,
        #[arg(long, default_value_t = 500)]
        samples: usize,
    },
    /// Quick exact-identity sanity suite
    Selftest,
}

fn parse_vec4(s: &str) -> Result<[i64; 4], Error> {
    let parts: Vec<i64> = s
        .split(',')
        .map(|t| t.trim().parse::<i64>())
        .collect::<Result<_, _>>()
        .map_err(|e| Error::InvalidInput(format!("bad 4-vector '{s}': {e}")))?;
    parts.try_into().map_err(|_| Error::InvalidInput(format!("'{s}' is not 4 integers")))
}

/// Window descriptors: bump:R=2, annular:R=2[,eta=0.5], ball:r=0.4,
/// box:lo1,lo2,lo3,lo4:hi1,hi2,hi3,hi4
fn parse_window(desc: &str) -> Result<Window, Error> {
    let bad = || Error::InvalidInput(format!("bad window descriptor '{desc}'"));
    let (kind, rest) = desc.split_once(':').ok_or_else(bad)?;
    let kv = |key: &str| -> Option<f64> {
        rest.split(',')
            .find_map(|p| p.split_once('=').filter(|(k, _)| *k == key))
            .and_then(|(_, v)| v.parse().ok())
    };
    match kind {
        "bump" => Window::radial_bump(kv("R").ok_or_else(bad)?),
        "annular" => Window::annular_bump(kv("R").ok_or_else(bad)?, kv("eta").unwrap_or(0.5)),
        "ball" => Window::metric_ball(kv("r").ok_or_else(bad)?),
        "box" => {
            let (lo, hi) = rest.split_once(':').ok_or_else(bad)?;
            let pf = |s: &str| -> Result<[f64; 4], Error> {
                let v: Vec<f64> =
                    s.split(',').map(|t| t.parse()).collect::<Result<_, _>>().map_err(|_| bad())?;
                v.try_into().map_err(|_| bad())
            };
            Window::indicator_box(pf(lo)?, pf(hi)?)
        }
        _ => Err(bad()),
    }
}

fn meta_lines(extra: &[(&str, String)]) -> String {
    let mut s = String::new();
    s.push_str(&format!("# quadrix {VERSION}\n"));
    s.push_str("# coeff order: 11,12,13,14,22,23,24,33,34,44; normalization: m_p(K)=1, covolume zeta(2)\n");
    for (k, v) in extra {
        s.push_str(&format!("# {k}: {v}\n"));
    }
    s
}

fn emit(out: &Option<String>, body: &str) -> Result<(), Error> {
    match out {
        None => {
            print!("{body}");
            std::io::stdout().flush().ok();
            Ok(())
        }
        Some(path) => std::fs::write(path, body)
            .map_err(|e| Error::InvalidInput(format!("cannot write {path}: {e}"))),
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let wb = cli.global.work_bound.unwrap_or_else(quadrix_core::default_work_bound);
    let seed = cli.global.seed;
    match cli.command {
        Cmd::Count { form, h, modulus, residue, window } => {
            let f = QuaternaryForm::by_key(&form)?;
            let cc = CongruenceClass::new(modulus, parse_vec4(&residue)?)?;
            let w = parse_window(&window)?;
            let t0 = Instant::now();
            let count = weighted_count(&f, h, &cc, &w, wb)?;
            let body = serde_json::json!({
                "meta": {"version": VERSION, "seed": seed},
                "form": f.name(),
                "h": h,
                "modulus": modulus,
                "residue": residue,
                "window": window,
                "count": format!("{count}"),
                "wall_time_ms": t0.elapsed().as_millis() as u64,
            });
            emit(&cli.global.out, &format!("{}\n", serde_json::to_string_pretty(&body).unwrap()))
        }
        Cmd::Sks { form, k_max, h, modulus, residue, c, verify } => {
            if k_max < 1 {
                return Err(Error::InvalidInput(format!("k_max must be >= 1, got {k_max}")));
            }
            let f = QuaternaryForm::by_key(&form)?;
            let cc = CongruenceClass::new(modulus, parse_vec4(&residue)?)?;
            let cv = parse_vec4(&c)?;
            let mut body = meta_lines(&[
                ("form", f.name().to_string()),
                ("h", h.to_string()),
                ("modulus", modulus.to_string()),
                ("c", c.clone()),
            ]);
            body.push_str("k,re,im,abs,bound_ratio\n");
            for k in 1..=k_max {
                let v = s_k_multiplicative_float(&f, k, &cc, &cv, h, wb)?;
                if verify {
                    let a = s_k_multiplicative(&f, k, &cc, &cv, h, wb)?;
                    let b = quadrix_core::expsums::s_k_direct(&f, k, &cc, &cv, h, wb)?;
                    if !a.exact.eq_exact(&b.exact) {
                        return Err(Error::NonConvergence(format!(
                            "recursive and direct evaluations disagree at k={k}"
                        )));
                    }
                }
                let kf = k as f64;
                body.push_str(&format!(
                    "{k},{:.12e},{:.12e},{:.12e},{:.12e}\n",
                    v.re,
                    v.im,
                    v.norm(),
                    v.norm() / (kf * kf * kf)
                ));
            }
            emit(&cli.global.out, &body)
        }
        Cmd::Densities { form, modulus, residue, h, q_max } => {
            let f = QuaternaryForm::by_key(&form)?;
            let cc = match residue {
                Some(r) => CongruenceClass::new(modulus, parse_vec4(&r)?)?,
                None => CongruenceClass::scalar_matrix(modulus, h)?,
            };
            let sf = sigma_finite(&f, &cc, h, q_max, 12, wb)?;
            let factors: Vec<serde_json::Value> = sf
                .factors
                .iter()
                .map(|(q, v)| serde_json::json!({"q": q, "sigma_q": v.to_string()}))
                .collect();
            let body = serde_json::json!({
                "meta": {"version": VERSION, "seed": seed},
                "form": f.name(),
                "modulus": cc.modulus(),
                "residue": cc.residue(),
                "h": h,
                "q_max": q_max,
                "factors": factors,
                "value": sf.value,
                "tail_lo": sf.tail_lo,
                "tail_hi": sf.tail_hi,
            });
            emit(&cli.global.out, &format!("{}\n", serde_json::to_string_pretty(&body).unwrap()))
        }
        Cmd::Maintermscan { form, p, s_max, modulus, window } => {
            let f = QuaternaryForm::by_key(&form)?;
            let w = parse_window(&window)?;
            let ladder: Vec<i64> = (1..=s_max).map(|s| (p as i64).pow(s)).collect();
            let cc = CongruenceClass::scalar_matrix(modulus, 1)?;
            let rep = main_term_and_error(&f, &cc, &w, &ladder, wb)?;
            let mut body = meta_lines(&[
                ("form", f.name().to_string()),
                ("window", window.clone()),
                ("sigma_inf", format!("{} +- {}", rep.sigma_inf, rep.sigma_inf_err)),
                ("error_slope", rep.error_slope.to_string()),
            ]);
            body.push_str("h,count,main,error,ratio\n");
            for (h, count, main, err) in &rep.rows {
                body.push_str(&format!("{h},{count},{main},{err},{}\n", count / main));
            }
            emit(&cli.global.out, &body)
        }
        Cmd::Spectral { p, s, height_max } => {
            let rows = spectral_sweep(p, s, height_max)?;
            let mut body = meta_lines(&[("p", p.to_string()), ("s", s.to_string())]);
            body.push_str("s_height,m_B,norm,norm_scaled,tempered_ref,weak_avg\n");
            for r in rows {
                body.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    r.s_height, r.m_b, r.norm, r.norm_scaled, r.tempered_ref, r.weak_avg
                ));
            }
            emit(&cli.global.out, &body)
        }
        Cmd::Exponents { family, n_max } => {
            let n_min = match family.as_str() {
                "sl" => 3,
                "sp" => 2,
                "so" => 4,
                other => return Err(Error::InvalidInput(format!("unknown family {other}"))),
            };
            if n_max < n_min {
                return Err(Error::InvalidInput(format!(
                    "family {family} needs n_max >= {n_min}"
                )));
            }
            let mut body = meta_lines(&[("family", family.clone())]);
            body.push_str("family,n,alpha_G,alpha_L,exponent\n");
            for n in n_min..=n_max {
                let g = RootDatum::by_family(&family, n)?;
                let l = RootDatum::by_family(&family, n - 1)?;
                let rep = norm_lower_exponent(&g, &l)?;
                body.push_str(&format!(
                    "{family},{n},{},{},{}\n",
                    rep.alpha_g, rep.alpha_l, rep.exponent
                ));
            }
            emit(&cli.global.out, &body)
        }
        Cmd::Discrepancy { p, s_max, modulus, r, samples } => {
            let mut body = meta_lines(&[
                ("p", p.to_string()),
                ("modulus", modulus.to_string()),
                ("r", r.to_string()),
                ("samples", samples.to_string()),
                ("seed", seed.to_string()),
                ("index", congruence_index(modulus as u64).to_string()),
                ("m_inf", haar_ball_volume(r)?.to_string()),
                ("note", "gap bound is conditional on discrete embedding".to_string()),
            ]);
            body.push_str("s,h,E,CI_lo,CI_hi,bound,kappa_fit_so_far\n");
            let mut pts = Vec::new();
            for s in 1..=s_max {
                let rep = mean_square_discrepancy(p, s, modulus, r, samples, seed, wb)?;
                let bound = spectral_gap_bound(modulus, r, rep.e)?;
                let m_p = quadrix_core::spectral::ball_volume(p, s).total;
                let m_pf = quadrix_core::densities::rat_to_f64(&m_p);
                pts.push((m_pf.ln(), -(rep.e.max(1e-300)).ln()));
                let kappa = if pts.len() >= 2 {
                    quadrix_core::densities::least_squares_slope(&pts)
                } else {
                    f64::NAN
                };
                body.push_str(&format!(
                    "{s},{},{},{},{},{bound},{kappa}\n",
                    (p as i64).pow(s),
                    rep.e,
                    rep.ci_lo,
                    rep.ci_hi
                ));
            }
            emit(&cli.global.out, &body)
        }
        Cmd::Proxy { p, modulus, window, s_max, samples } => {
            let w = parse_window(&window)?;
            let ladder: Vec<u32> = (1..=s_max).collect();
            let rep = smooth_proxy_decay(p, modulus, &w, &ladder, samples, seed, wb)?;
            let mut body = meta_lines(&[
                ("p", p.to_string()),
                ("modulus", modulus.to_string()),
                ("window", window.clone()),
                ("samples", samples.to_string()),
                ("seed", seed.to_string()),
                ("sigma_fit", rep.sigma.to_string()),
                ("reference_exponent", "1/16 (isotropic target; not asserted)".to_string()),
            ]);
            body.push_str("s,m_B,rms\n");
            for (s, m, rms) in &rep.rows {
                body.push_str(&format!("{s},{m},{rms}\n"));
            }
            emit(&cli.global.out, &body)
        }
        Cmd::Selftest => {
            let mut body = String::new();
            let f = QuaternaryForm::det4();
            let cc = CongruenceClass::trivial();
            let mut ok = true;
            let mut check = |name: &str, pass: bool| {
                body.push_str(&format!("{name}: {}\n", if pass { "ok" } else { "FAIL" }));
                ok &= pass;
            };
            let a = s_k_multiplicative(&f, 12, &cc, &[0; 4], 1, wb)?;
            let b = quadrix_core::expsums::s_k_direct(&f, 12, &cc, &[0; 4], 1, wb)?;
            check("expsum multiplicativity k=12", a.exact.eq_exact(&b.exact));
            let sols = enumerate_solutions_naive(&f, 2, &cc, &[(-2.0, 2.0); 4]);
            check("det4 h=2 box count", sols.len() == 52);
            let v = volume_exponent(&RootDatum::sl(3)?)?;
            check("sl3 volume exponent", v == quadrix_core::rat_int(6));
            check("|SL2(Z/4)| = 48", congruence_index(4) == 48);
            body.push_str(if ok { "selftest: all ok\n" } else { "selftest: FAILURES\n" });
            emit(&cli.global.out, &body)?;
            if !ok {
                return Err(Error::NonConvergence("selftest failed".into()));
            }
            Ok(())
        }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                eprint!("{e}");
                std::process::exit(1);
            }
            // --help / --version
            print!("{e}");
            std::process::exit(0);
        }
    };
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
