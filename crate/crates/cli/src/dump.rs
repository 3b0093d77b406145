//! Tables of the priors stored for one category.

use std::io::{self, Write};

use serde_json::{json, Value};

use scenesuggest_core::corpus::Relationship;
use scenesuggest_core::priors::{PriorsDb, RelKey, RelSamples};

use crate::Family;

fn relationship(r: Relationship) -> &'static str {
    match r {
        Relationship::Sibling => "sibling",
        Relationship::ChildParent => "child-parent",
    }
}

fn key_fields(k: &RelKey) -> Value {
    json!({
        "ref": k.ref_category,
        "sceneType": k.scene_type,
        "relationship": relationship(k.relationship),
        "surface": k.surface,
    })
}

/// Prints every stored entry of `family` whose (child) category is `key`.
/// Unknown keys print an empty table.
pub fn dump(out: &mut impl Write, db: &PriorsDb, key: &str, family: Family, json_out: bool) -> io::Result<()> {
    let rows = rows(db, key, family);
    if json_out {
        let doc = json!({ "key": key, "family": format!("{family:?}").to_lowercase(), "rows": rows });
        return writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("rows serialize"));
    }
    match family {
        Family::Relpos => {
            writeln!(out, "ref,sceneType,relationship,surface,kind,x,y")?;
            for r in &rows {
                let y = r.get("y").map(|v| v.to_string()).unwrap_or_default();
                writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    str_of(&r["ref"]),
                    str_of(&r["sceneType"]),
                    str_of(&r["relationship"]),
                    str_of(&r["surface"]),
                    str_of(&r["kind"]),
                    r["x"],
                    y
                )?;
            }
            Ok(())
        }
        _ => print_table(out, &rows),
    }
}

fn str_of(v: &Value) -> String {
    v.as_str().map(str::to_string).unwrap_or_else(|| v.to_string())
}

fn print_table(out: &mut impl Write, rows: &[Value]) -> io::Result<()> {
    let Some(first) = rows.first().and_then(Value::as_object) else {
        return writeln!(out, "(no entries)");
    };
    let columns: Vec<&String> = first.keys().collect();
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| columns.iter().map(|c| str_of(&r[c.as_str()])).collect())
        .collect();
    let widths: Vec<usize> = columns
        .iter()
        .enumerate()
        .map(|(i, c)| cells.iter().map(|row| row[i].len()).chain([c.len()]).max().unwrap_or(0))
        .collect();
    let line = |vals: Vec<&str>| {
        vals.iter().zip(&widths).map(|(v, w)| format!("{v:<w$}")).collect::<Vec<_>>().join("  ")
    };
    writeln!(out, "{}", line(columns.iter().map(|c| c.as_str()).collect()))?;
    for row in &cells {
        writeln!(out, "{}", line(row.iter().map(String::as_str).collect()))?;
    }
    Ok(())
}

fn rows(db: &PriorsDb, key: &str, family: Family) -> Vec<Value> {
    let mut out = Vec::new();
    match family {
        Family::Support => {
            for c in db.surface_categoricals().filter(|c| c.category == key) {
                for (surface, p) in &c.probs {
                    out.push(json!({ "surface": surface, "count": c.counts.get(surface).copied().unwrap_or(0), "prob": p }));
                }
            }
        }
        Family::Face => {
            for c in db.face_categoricals().filter(|c| c.category == key) {
                for (face, p) in &c.probs {
                    out.push(json!({
                        "surface": c.surface,
                        "face": face,
                        "count": c.counts.get(face).copied().unwrap_or(0),
                        "prob": p,
                    }));
                }
            }
        }
        Family::Count => {
            for h in db.count_histograms().filter(|h| h.child_category == key) {
                for (k, p) in &h.probs {
                    out.push(json!({
                        "parent": h.parent_category,
                        "sceneType": h.scene_type,
                        "k": k,
                        "count": h.counts.get(k).copied().unwrap_or(0),
                        "prob": p,
                    }));
                }
            }
        }
        Family::Relpos => {
            for e in db.rel_pos_entries().filter(|e| e.key.obj_category == key) {
                let base = key_fields(&e.key);
                match &e.samples {
                    RelSamples::Planar { points, .. } => {
                        for p in points {
                            let mut row = base.clone();
                            row["kind"] = json!("planar");
                            row["x"] = json!(p[0]);
                            row["y"] = json!(p[1]);
                            out.push(row);
                        }
                    }
                    RelSamples::Radial { distances, .. } => {
                        for d in distances {
                            let mut row = base.clone();
                            row["kind"] = json!("radial");
                            row["x"] = json!(d);
                            out.push(row);
                        }
                    }
                }
            }
        }
        Family::Relorient => {
            for h in db.rel_orient_entries().filter(|h| h.key.obj_category == key) {
                let width = 360.0 / h.bins.len() as f64;
                for (i, p) in h.bins.iter().enumerate() {
                    let mut row = key_fields(&h.key);
                    row["binDeg"] = json!(i as f64 * width);
                    row["count"] = json!(h.counts.get(i).copied().unwrap_or(0));
                    row["prob"] = json!(p);
                    out.push(row);
                }
            }
        }
    }
    out
}
