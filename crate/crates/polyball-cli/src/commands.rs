use std::fs;
use std::io::Write;
use std::path::Path;

use log::info;
use polyball::berezin::{berezin_kernel, berezin_transform, berezin_transform_ext, in_polyball, PolyballPoint};
use polyball::fock::{FockOperator, FockTruncation};
use polyball::linalg::{c64, to_interleaved, CMat};
use polyball::naimark::{dilation_verify, naimark_dilate, ToeplitzKernel};
use polyball::pluriharm::{fantappie_transform, herglotz_transform, poisson_transform, CbMapData};
use serde_json::{json, Value};

use crate::{Failure, RunConfig, TransformKind};

pub fn matrix_json(m: &CMat) -> Value {
    json!({"rows": m.nrows(), "cols": m.ncols(), "data": to_interleaved(m)})
}

fn read_json(path: &Path) -> Result<Value, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

/// Writes `report` to `--output`, or to stdout.
pub fn emit(cfg: &RunConfig, report: &Value) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(report).map_err(|e| Failure::Internal(e.to_string()))?;
    match &cfg.output {
        Some(p) => fs::write(p, text + "\n")
            .map_err(|e| Failure::Internal(format!("cannot write {}: {e}", p.display()))),
        None => match writeln!(std::io::stdout().lock(), "{text}") {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                Err(Failure::Internal(format!("cannot write to stdout: {e}")))
            }
            _ => Ok(()),
        },
    }
}

pub fn cmd_dilate(path: &Path, cfg: &RunConfig) -> Result<(), Failure> {
    let k = ToeplitzKernel::from_json(&read_json(path)?)?;
    info!("dilating kernel with n = {:?}, L = {}", k.n(), k.max_len());
    let d = naimark_dilate(&k, cfg.rank_tol)?;
    let report = dilation_verify(&d, &k)?;
    info!("space dimension {}, reproduction error {:e}", d.space_dim, report.reproduction_error);
    emit(
        cfg,
        &json!({
            "config": cfg,
            "kernel": {"side": k.side(), "n": k.n(), "e_dim": k.e_dim(), "max_len": k.max_len()},
            "dilation": d.to_json(),
            "report": report,
        }),
    )
}

enum Operand {
    Operator(FockOperator),
    Data(CbMapData),
}

fn operand(kind: TransformKind, v: &Value, x: &PolyballPoint, cfg: &RunConfig) -> Result<Operand, Failure> {
    match kind {
        TransformKind::Berezin => match v.get("operator") {
            None | Some(Value::Null) => identity_operator(x, cfg),
            Some(Value::String(s)) if s == "identity" => identity_operator(x, cfg),
            Some(o) => Ok(Operand::Operator(FockOperator::from_json(o)?)),
        },
        _ => {
            if let Some(mu) = v.get("mu") {
                return Ok(Operand::Data(CbMapData::from_json(mu)?));
            }
            let fam = v
                .get("family")
                .ok_or_else(|| Failure::Config("inputs need `mu` or `family`".into()))?;
            let name = fam.get("kind").and_then(Value::as_str).unwrap_or("");
            match name {
                "vacuum" => {
                    let e = fam.get("e_dim").and_then(Value::as_u64).unwrap_or(1) as usize;
                    Ok(Operand::Data(CbMapData::vacuum(x.n(), e)?))
                }
                "point_mass" => {
                    let zeta: Vec<[f64; 2]> = serde_json::from_value(
                        fam.get("zeta").cloned().unwrap_or(Value::Null),
                    )
                    .map_err(|e| Failure::Config(format!("point_mass zeta: {e}")))?;
                    let degree = fam
                        .get("degree")
                        .and_then(Value::as_u64)
                        .ok_or_else(|| Failure::Config("point_mass needs degree".into()))?;
                    let zeta: Vec<_> = zeta.iter().map(|z| c64(z[0], z[1])).collect();
                    Ok(Operand::Data(CbMapData::point_mass(&zeta, degree as usize)?))
                }
                other => Err(Failure::Config(format!("unknown family `{other}`"))),
            }
        }
    }
}

fn identity_operator(x: &PolyballPoint, cfg: &RunConfig) -> Result<Operand, Failure> {
    if cfg.degrees.len() != x.k() {
        return Err(Failure::Config(format!(
            "--degrees has {} entries but the point has {} factors",
            cfg.degrees.len(),
            x.k()
        )));
    }
    let t = FockTruncation::new(x.n(), &cfg.degrees)?;
    Ok(Operand::Operator(FockOperator::identity(&t, 1)))
}

/// Value on `H ⊗ E` and its tail bound.
fn evaluate(kind: TransformKind, op: &Operand, x: &PolyballPoint) -> Result<(CMat, f64), Failure> {
    let out = match (kind, op) {
        (TransformKind::Berezin, Operand::Operator(g)) => {
            let k = berezin_kernel(x, &g.truncation)?;
            let v = if g.coeff_dim == 1 {
                berezin_transform(g, &k)?
            } else {
                berezin_transform_ext(g, &k)?
            };
            (v, k.tail_bound)
        }
        (TransformKind::Poisson, Operand::Data(mu)) => {
            let t = poisson_transform(mu, x)?;
            (t.value, t.tail_bound)
        }
        (TransformKind::Fantappie, Operand::Data(mu)) => {
            let t = fantappie_transform(mu, x)?;
            (t.value, t.tail_bound)
        }
        (TransformKind::Herglotz, Operand::Data(mu)) => {
            let t = herglotz_transform(mu, x)?;
            (t.value, t.tail_bound)
        }
        _ => return Err(Failure::Internal("operand does not match the transform".into())),
    };
    Ok(out)
}

pub fn cmd_transform(kind: TransformKind, path: &Path, cfg: &RunConfig) -> Result<(), Failure> {
    let v = read_json(path)?;
    let x = PolyballPoint::from_json(v.get("point").unwrap_or(&Value::Null))?;
    let m = in_polyball(&x, 0.0);
    if !m.member {
        return Err(Failure::Domain(format!(
            "point is outside the polyball: row norms {:?}, defect min eigenvalue {:e}, commutation defect {:e}",
            m.row_norms, m.defect_min_eig, m.commutation_defect
        )));
    }
    let op = operand(kind, &v, &x, cfg)?;
    let (value, tail) = evaluate(kind, &op, &x)?;
    let mut report = json!({
        "kind": kind,
        "config": cfg,
        "h_dim": x.h_dim(),
        "value": matrix_json(&value),
        "tail_bound": tail,
        "membership": m,
    });
    if x.h_dim() == 1 {
        let csv = radial_csv(kind, &op, &x, &cfg.r_grid)?;
        match &cfg.output {
            Some(p) => {
                let cp = p.with_extension("csv");
                fs::write(&cp, csv)
                    .map_err(|e| Failure::Internal(format!("cannot write {}: {e}", cp.display())))?;
                report["csv"] = json!(cp.display().to_string());
            }
            None => report["csv"] = json!(csv),
        }
    }
    emit(cfg, &report)
}

/// Rows `r,row,col,re,im,tail_bound` for the transform at `rX`.
fn radial_csv(kind: TransformKind, op: &Operand, x: &PolyballPoint, grid: &[f64]) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Failure::Internal(e.to_string());
    w.write_record(["r", "row", "col", "re", "im", "tail_bound"]).map_err(io)?;
    for &r in grid {
        let (val, tail) = evaluate(kind, op, &x.scaled(r))?;
        for i in 0..val.nrows() {
            for j in 0..val.ncols() {
                let z = val[(i, j)];
                w.serialize((r, i, j, z.re, z.im, tail)).map_err(io)?;
            }
        }
    }
    let bytes = w.into_inner().map_err(|e| Failure::Internal(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Failure::Internal(e.to_string()))
}
