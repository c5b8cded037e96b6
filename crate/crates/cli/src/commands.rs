use std::path::Path;

use mflab_core::experiments::{
    ade_catalog, bt_family_report, catalog_entry, harada_sai_chain, kawasaki_growth, knoerrer_transfer_report,
    standard_chain, CatalogEntry, ChainFile, ExperimentReport, Family,
};
use mflab_core::hmf;
use mflab_core::homalg::{
    annihilator_exponent, hlength, lat_approximation_of_simple, minimal_resolution, multiplicity_module,
    stable_hom_dim, ModulePresentation,
};
use mflab_core::knoerrer::{
    find_section, flat_mf, iso_report, sharp_mf, verify_knoerrer_roundtrip, Direction, IdentityReport,
};
use mflab_core::report::{Status, SCHEMA_VERSION};
use mflab_core::rings::{curve_conductor, ring_multiplicity};
use mflab_core::{Context, Field, HypersurfaceRing, MatrixFactorization, MflabError, MonomialCurveRing};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::args::{
    CatalogSel, Command, ExpCmd, HomCmd, InvariantCmd, KnoerrerCmd, MfCmd, RingCmd, RoundTrip, RunConfig, Transform,
};
use crate::load::{self, Descriptor, ModuleInput};
use crate::output::{row, Report};
use crate::{CliError, CliResult};

pub fn dispatch(cmd: &Command, cfg: &RunConfig) -> CliResult<Report> {
    let name = cmd.name();
    match cmd {
        Command::Ring(RingCmd::Check { file }) => ring_check(&name, file, cfg),
        Command::Mf(c) => mf_command(&name, c, cfg),
        Command::Knoerrer(c) => knoerrer_command(&name, c, cfg),
        Command::Hom(HomCmd::Stable { m, n }) => hom_stable(&name, m, n, cfg),
        Command::Invariant(c) => invariant(&name, c, cfg),
        Command::Resolve { file, steps } => resolve(&name, file, *steps, cfg),
        Command::ApproxK { ring } => approx_k(&name, ring, cfg),
        Command::Exp(c) => experiment(&name, c, cfg),
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

/// Truncation from the flag or environment, else from the first file.
fn trunc_for(cfg: &RunConfig, file: &Path) -> CliResult<usize> {
    cfg.trunc_or(load::file_trunc(file)?)
}

fn ring_check(name: &str, file: &Path, cfg: &RunConfig) -> CliResult<Report> {
    match load::descriptor(file)? {
        Descriptor::Ring(mut d) => {
            let trunc = cfg.trunc_or(Some(d.trunc))?;
            d.trunc = trunc;
            let r = HypersurfaceRing::from_descriptor(&d)?;
            let ctx = Context::new(trunc, cfg.seed);
            let e = ring_multiplicity(&r);
            let (hilbert, status) = if r.dim() >= 1 {
                match multiplicity_module(&ModulePresentation::free(&r, 1, trunc)?, &ctx) {
                    Ok(m) => (Some(m.value), Status::from_bool(m.value == e)),
                    Err(err) => (None, Status::from_error(&err).ok_or(err)?),
                }
            } else {
                (None, Status::Pass)
            };
            let cover = r.double_branched_cover()?;
            let body = json!({
                "kind": "hypersurface",
                "ring": r.to_string(),
                "field": d.field,
                "vars": r.vars(),
                "f": r.f().to_string(),
                "dim": r.dim(),
                "multiplicity": e,
                "hilbert_multiplicity": hilbert,
                "cover": cover.ring.to_string(),
                "cover_variable": cover.var,
                "cover_variable_renamed": cover.renamed,
            });
            Ok(Report::new(name, status, trunc, cfg.seed, body))
        }
        Descriptor::Curve(d) => {
            let trunc = cfg.trunc_or(None)?;
            let c = MonomialCurveRing::from_descriptor(&d)?;
            let plane = if c.semigroup.len() == 2 {
                Some(c.plane_model(trunc)?.to_string())
            } else {
                None
            };
            let body = json!({
                "kind": "curve",
                "field": d.field,
                "semigroup": c.semigroup,
                "curve_trunc": c.trunc,
                "conductor": c.conductor(),
                "multiplicity": c.multiplicity(),
                "gaps": c.gaps(),
                "gorenstein": c.is_gorenstein(),
                "plane_model": plane,
            });
            Ok(Report::new(name, Status::Pass, trunc, cfg.seed, body))
        }
    }
}

fn mf_summary(mf: &MatrixFactorization) -> Value {
    json!({
        "size": mf.size(),
        "reduced": mf.is_reduced(),
        "ring": mf.ring().descriptor(),
        "phi": mf.phi().to_strings(),
        "psi": mf.psi().to_strings(),
    })
}

fn transform(
    name: &str,
    t: &Transform,
    cfg: &RunConfig,
    op: impl Fn(&MatrixFactorization) -> mflab_core::Result<MatrixFactorization>,
) -> CliResult<Report> {
    let trunc = trunc_for(cfg, &t.file)?;
    let mf = load::mf(&t.file, Some(trunc))?;
    let out = op(&mf)?;
    out.validate()?;
    if let Some(path) = &t.out {
        load::write_mf(path, &out)?;
    }
    let mut body = Map::new();
    body.insert("input".into(), json!(t.file.display().to_string()));
    body.insert("mf".into(), mf_summary(&out));
    Ok(Report::new(name, Status::Pass, trunc, cfg.seed, Value::Object(body)))
}

fn identity_report(name: &str, rep: IdentityReport, seed: u64) -> Report {
    Report::new(name, rep.status, rep.trunc, seed, to_value(&rep))
}

fn mf_command(name: &str, c: &MfCmd, cfg: &RunConfig) -> CliResult<Report> {
    match c {
        MfCmd::Validate { files } => {
            let trunc = trunc_for(cfg, &files[0])?;
            let results: Vec<Value> = files
                .par_iter()
                .map(|f| -> CliResult<Value> {
                    let mf = load::mf(f, cfg.trunc)?;
                    Ok(match mf.validate() {
                        Ok(v) => json!({ "file": f.display().to_string(), "status": Status::Pass, "report": v }),
                        Err(e @ MflabError::NotAFactorization { .. }) => {
                            json!({ "file": f.display().to_string(), "status": Status::Fail, "error": e.to_string() })
                        }
                        Err(e) => return Err(e.into()),
                    })
                })
                .collect::<CliResult<_>>()?;
            let status = Status::all(
                results
                    .iter()
                    .map(|r| serde_json::from_value(r["status"].clone()).unwrap()),
            );
            let rows = results.iter().map(|r| {
                let mut m = row(r);
                if let Some(Value::Object(rep)) = m.remove("report") {
                    m.extend(rep);
                }
                m
            });
            let rows: Vec<_> = rows.collect();
            Ok(Report::new(name, status, trunc, cfg.seed, json!({ "results": results })).with_rows(rows))
        }
        MfCmd::Shift(t) => transform(name, t, cfg, |m| Ok(m.shift())),
        MfCmd::Reduce(t) => transform(name, t, cfg, |m| m.reduce()),
        MfCmd::Transpose(t) => transform(name, t, cfg, |m| m.transpose()),
        MfCmd::Tau(t) => transform(name, t, cfg, |m| m.reduce()?.ar_translate(m.ring().dim())),
        MfCmd::Iso { a, b } => {
            let trunc = trunc_for(cfg, a)?;
            let (ma, mb) = (load::mf(a, Some(trunc))?, load::mf(b, Some(trunc))?);
            if !ma.ring().compatible(mb.ring()) {
                return Err(MflabError::MismatchedRing(format!("{} vs {}", ma.ring(), mb.ring())).into());
            }
            let ctx = Context::new(trunc, cfg.seed);
            let rep = iso_report("Coker(phi_a) = Coker(phi_b)", &ma, &mb, &ctx)?;
            Ok(identity_report(name, rep, cfg.seed))
        }
    }
}

/// The built-in catalog: A_n (both kinds) for n <= 6, D_4..D_8, E_6, E_7, E_8 and the node.
fn full_catalog(trunc: usize) -> CliResult<Vec<CatalogEntry>> {
    let k = Field::fp(7)?;
    let mut out = ade_catalog(Family::AnOneVariable, 1..=6, &k, trunc)?;
    out.extend(ade_catalog(Family::AnCurve, 1..=6, &k, trunc)?);
    out.extend(ade_catalog(Family::Dn, 4..=8, &k, trunc)?);
    for f in [Family::E6, Family::E7, Family::E8, Family::Node] {
        out.extend(ade_catalog(f, [0], &k, trunc)?);
    }
    Ok(out)
}

fn knoerrer_command(name: &str, c: &KnoerrerCmd, cfg: &RunConfig) -> CliResult<Report> {
    match c {
        KnoerrerCmd::Sharp(t) => transform(name, t, cfg, sharp_mf),
        KnoerrerCmd::Flat(t) => transform(name, t, cfg, flat_mf),
        KnoerrerCmd::Verify {
            files,
            roundtrip,
            catalog,
            section,
        } => {
            let (trunc, inputs): (usize, Vec<(String, MatrixFactorization)>) = match catalog {
                Some(CatalogSel::Ade) => {
                    let trunc = cfg.trunc_or(None)?;
                    let mut v = Vec::new();
                    for e in full_catalog(trunc)? {
                        for (label, mf) in e.labels.iter().zip(&e.mfs) {
                            v.push((format!("{}: {label}", e.name()), mf.clone()));
                        }
                    }
                    (trunc, v)
                }
                None => {
                    let Some(first) = files.first() else {
                        return Err(CliError::Input("give factorization files or --catalog ade".into()));
                    };
                    let trunc = trunc_for(cfg, first)?;
                    let v = files
                        .iter()
                        .map(|f| Ok((f.display().to_string(), load::mf(f, Some(trunc))?)))
                        .collect::<CliResult<_>>()?;
                    (trunc, v)
                }
            };
            let ctx = Context::new(trunc, cfg.seed);
            let results: Vec<Value> = inputs
                .par_iter()
                .map(|(id, m)| -> CliResult<Vec<Value>> {
                    let mut reps = Vec::new();
                    let mut push = |r: mflab_core::Result<IdentityReport>| -> CliResult<()> {
                        let r = match r {
                            Ok(r) => r,
                            Err(e) => match Status::from_error(&e) {
                                Some(s) => IdentityReport {
                                    identity: "certification".into(),
                                    lhs_dim: 0,
                                    rhs_dim: 0,
                                    trunc,
                                    status: s,
                                    witness: None,
                                    note: Some(e.to_string()),
                                },
                                None => return Err(e.into()),
                            },
                        };
                        let mut v = to_value(&r);
                        v["id"] = json!(id);
                        reps.push(v);
                        Ok(())
                    };
                    match roundtrip {
                        RoundTrip::SharpFlat => push(verify_knoerrer_roundtrip(m, Direction::SharpThenFlat, &ctx))?,
                        RoundTrip::FlatSharp => push(verify_knoerrer_roundtrip(m, Direction::FlatThenSharp, &ctx))?,
                        RoundTrip::Both => {
                            push(verify_knoerrer_roundtrip(m, Direction::SharpThenFlat, &ctx))?;
                            let sharp = sharp_mf(m)?;
                            push(verify_knoerrer_roundtrip(&sharp, Direction::FlatThenSharp, &ctx))?;
                        }
                    }
                    if *section {
                        push(find_section(&sharp_mf(m)?, &ctx))?;
                    }
                    Ok(reps)
                })
                .collect::<CliResult<Vec<_>>>()?
                .into_iter()
                .flatten()
                .collect();
            let status = Status::all(
                results
                    .iter()
                    .map(|r| serde_json::from_value(r["status"].clone()).unwrap()),
            );
            let rows = results
                .iter()
                .map(|r| {
                    let mut m = row(r);
                    m.remove("witness");
                    m
                })
                .collect();
            Ok(
                Report::new(name, status, trunc, cfg.seed, json!({ "results": results }))
                    .with_rows(rows)
                    .with_columns(&["id", "identity", "lhs_dim", "rhs_dim", "status", "note"]),
            )
        }
    }
}

fn certified_report(name: &str, value: usize, certificate: Value, trunc: usize, seed: u64) -> Report {
    Report::new(
        name,
        Status::Pass,
        trunc,
        seed,
        json!({ "value": value, "certificate": certificate }),
    )
}

fn hom_stable(name: &str, m: &Path, n: &Path, cfg: &RunConfig) -> CliResult<Report> {
    let trunc = trunc_for(cfg, m)?;
    let ctx = Context::new(trunc, cfg.seed);
    let (a, b) = (load::module(m, trunc)?, load::module(n, trunc)?);
    if !a.ring().compatible(b.ring()) {
        return Err(MflabError::MismatchedRing(format!("{} vs {}", a.ring(), b.ring())).into());
    }
    let cert = match (&a, &b) {
        (ModuleInput::Mf(x), ModuleInput::Mf(y)) => hmf::stable_hom_dim(x, y, &ctx)?,
        _ => stable_hom_dim(&a.presentation(trunc)?, &b.presentation(trunc)?, &ctx)?,
    };
    Ok(certified_report(name, cert.value, to_value(&cert), trunc, cfg.seed))
}

fn invariant(name: &str, c: &InvariantCmd, cfg: &RunConfig) -> CliResult<Report> {
    let file = match c {
        InvariantCmd::Hlength { file }
        | InvariantCmd::Betti { file }
        | InvariantCmd::Mult { file }
        | InvariantCmd::Annexp { file } => file,
    };
    let trunc = trunc_for(cfg, file)?;
    let ctx = Context::new(trunc, cfg.seed);
    let input = load::module(file, trunc)?;
    let m = input.presentation(trunc)?;
    let seed = cfg.seed;
    Ok(match c {
        InvariantCmd::Hlength { .. } => {
            let g = lat_approximation_of_simple(m.ring(), &ctx)?.g;
            let h = hlength(&m, &g, &ctx)?;
            certified_report(name, h.length, to_value(&h.certificate), trunc, seed)
        }
        InvariantCmd::Betti { .. } => {
            let min = m.minimize();
            let cert = json!({ "minimal": min.is_minimal(), "relations": min.cols() });
            certified_report(name, min.betti(), cert, trunc, seed)
        }
        InvariantCmd::Mult { .. } => {
            let e = multiplicity_module(&m, &ctx)?;
            certified_report(name, e.value, to_value(&e), trunc, seed)
        }
        InvariantCmd::Annexp { .. } => {
            let a = annihilator_exponent(&m, &ctx)?;
            certified_report(name, a.value, to_value(&a), trunc, seed)
        }
    })
}

fn resolve(name: &str, file: &Path, steps: usize, cfg: &RunConfig) -> CliResult<Report> {
    let trunc = trunc_for(cfg, file)?;
    let ctx = Context::new(trunc, cfg.seed);
    let m = load::module(file, trunc)?.presentation(trunc)?;
    let res = minimal_resolution(&m, steps, &ctx)?;
    let rep = res.report(&m);
    let rows = rep
        .betti
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let mut r = Map::new();
            r.insert("step".into(), json!(i));
            r.insert("betti".into(), json!(b));
            r.insert(
                "window".into(),
                json!(if i == 0 { None } else { rep.windows.get(i - 1) }),
            );
            r
        })
        .collect();
    Ok(Report::new(name, Status::Pass, trunc, cfg.seed, to_value(&rep))
        .with_rows(rows)
        .with_columns(&["step", "betti", "window"]))
}

fn approx_k(name: &str, ring: &Path, cfg: &RunConfig) -> CliResult<Report> {
    let trunc = cfg.trunc_or(load::file_trunc(ring)?)?;
    let r = load::ring(ring, Some(trunc))?;
    let ctx = Context::new(trunc, cfg.seed);
    let a = lat_approximation_of_simple(&r, &ctx)?;
    Ok(Report::new(
        name,
        Status::from_bool(a.verified()),
        trunc,
        cfg.seed,
        to_value(&a.report()),
    ))
}

fn experiment_report(name: &str, rep: ExperimentReport) -> Report {
    let rows = rep.items.iter().map(|i| row(&to_value(i))).collect();
    Report::new(name, rep.status, rep.trunc, rep.seed, to_value(&rep)).with_rows(rows)
}

fn experiment(name: &str, c: &ExpCmd, cfg: &RunConfig) -> CliResult<Report> {
    match c {
        ExpCmd::Catalog {
            family,
            min,
            max,
            field,
        } => {
            let trunc = cfg.trunc_or(None)?;
            let ctx = Context::new(trunc, cfg.seed);
            let k = Field::fp(*field)?;
            let families: Vec<Family> = family.map_or_else(|| Family::ALL.to_vec(), |f| vec![f]);
            let mut entries = Vec::new();
            for f in families {
                let lo = min.unwrap_or(f.min_n()).max(f.min_n());
                if f.takes_n() && lo > *max {
                    continue;
                }
                entries.extend(ade_catalog(f, lo..=*max, &k, trunc)?);
            }
            let reports: Vec<ExperimentReport> = entries
                .par_iter()
                .map(|e| e.check(&ctx))
                .collect::<mflab_core::Result<_>>()?;
            let mut items = Vec::new();
            for (e, r) in entries.iter().zip(&reports) {
                for mut it in r.items.clone() {
                    it.id = format!("{}: {}", e.name(), it.id);
                    items.push(it);
                }
            }
            let status = Status::all(reports.iter().map(|r| r.status));
            let rep = ExperimentReport {
                schema_version: SCHEMA_VERSION,
                experiment: "catalog".into(),
                inputs: json!({ "family": family.map(|f| f.to_string()), "min": min, "max": max, "field": field }),
                items,
                status,
                summary: json!({
                    "entries": entries.iter().map(|e| e.name()).collect::<Vec<_>>(),
                    "factorizations": entries.iter().map(|e| e.mfs.len()).sum::<usize>(),
                }),
                notes: reports.iter().flat_map(|r| r.notes.clone()).collect(),
                trunc,
                seed: cfg.seed,
            };
            Ok(experiment_report(name, rep))
        }
        ExpCmd::Kawasaki { ring, n } => {
            let trunc = cfg.trunc_or(load::file_trunc(ring)?)?;
            let r = load::ring(ring, Some(trunc))?;
            let rep = kawasaki_growth(&r, *n, &Context::new(trunc, cfg.seed))?;
            Ok(experiment_report(name, rep))
        }
        ExpCmd::HaradaSai { chain, standard, x } => {
            let file: ChainFile = match (chain, standard) {
                (Some(p), _) => serde_json::from_str(&load::read(p)?)
                    .map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?,
                (None, Some(len)) => standard_chain(*len, cfg.trunc_or(None)?)?,
                (None, None) => return Err(CliError::Input("give --chain or --standard".into())),
            };
            let trunc = cfg.trunc_or(Some(file.ring.trunc))?;
            let mut file = file;
            file.ring.trunc = trunc;
            let ring = file.ring()?;
            let x_text = x
                .clone()
                .or_else(|| file.x.clone())
                .ok_or_else(|| CliError::Input("the element x is missing: pass --x".into()))?;
            let x = ring.parse(&x_text)?;
            let rep = harada_sai_chain(&file.morphisms()?, &x, &Context::new(trunc, cfg.seed))?;
            Ok(experiment_report(name, rep))
        }
        ExpCmd::BtFamily {
            curve,
            field,
            count,
            taus,
            curve_trunc,
        } => {
            let trunc = cfg.trunc_or(None)?;
            let need = curve_conductor(curve)? as usize + 2 * curve.iter().copied().max().unwrap_or(0) as usize;
            let ct = curve_trunc.unwrap_or(need.max(40));
            let ring = load::curve(curve, *field, ct)?;
            let taus: Vec<i64> = taus.clone().unwrap_or_else(|| (1..=*count as i64).collect());
            let rep = bt_family_report(&ring, &taus, &Context::new(trunc, cfg.seed))?;
            Ok(experiment_report(name, rep).with_columns(&["tau", "betti", "hlength", "indecomposable", "distinct"]))
        }
        ExpCmd::KnoerrerTransfer {
            files,
            family,
            n,
            field,
        } => {
            let (ring, mfs, trunc) = match family {
                Some(f) => {
                    let trunc = cfg.trunc_or(None)?;
                    let e = catalog_entry(*f, *n, &Field::fp(*field)?, trunc)?;
                    (e.ring, e.mfs, trunc)
                }
                None => {
                    let Some(first) = files.first() else {
                        return Err(CliError::Input("give factorization files or --family".into()));
                    };
                    let trunc = trunc_for(cfg, first)?;
                    let mfs: Vec<MatrixFactorization> = files
                        .iter()
                        .map(|f| load::mf(f, Some(trunc)))
                        .collect::<CliResult<_>>()?;
                    (mfs[0].ring().clone(), mfs, trunc)
                }
            };
            let rep = knoerrer_transfer_report(&ring, &mfs, &Context::new(trunc, cfg.seed))?;
            Ok(experiment_report(name, rep))
        }
    }
}
