//! Test fixtures: a small Spider-layout dataset (three SQLite databases,
//! fifty questions) and seeded synthetic generation records over it.

pub mod data;

use std::fs;
use std::io;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rusqlite::Connection;
use serde_json::json;
use sqlshape_core::robustness::PerturbationKind;
use sqlshape_core::store::{Decoding, GenerationRecord, RECORD_VERSION};

use data::{Database, DATABASES, QUESTIONS};

/// Index of the minimum-horsepower question on `car_1`.
pub const MIN_HORSEPOWER_QID: &str = "22";
/// Index of the countries-with-a-maker question on `car_1`.
pub const COUNTRIES_WITH_MAKER_QID: &str = "23";

pub const MIN_HORSEPOWER_SUBQUERY: &str = "SELECT DISTINCT cn.Model\nFROM cars_data cd\nJOIN car_names cn ON cd.Id = cn.MakeId\nWHERE cd.Horsepower = (\n  SELECT MIN(Horsepower) FROM cars_data\n);";

fn tables_entry(db: &Database) -> serde_json::Value {
    let mut column_names = vec![json!([-1, "*"])];
    let mut column_types = vec![json!("text")];
    let mut primary_keys = Vec::new();
    let mut index_of = Vec::new();
    for (ti, t) in db.tables.iter().enumerate() {
        for (ci, (c, ty)) in t.columns.iter().enumerate() {
            if ci == 0 {
                primary_keys.push(column_names.len());
            }
            index_of.push((t.name, *c, column_names.len()));
            column_names.push(json!([ti, c]));
            column_types.push(json!(if *ty == "TEXT" { "text" } else { "number" }));
        }
    }
    let find = |t: &str, c: &str| {
        index_of
            .iter()
            .find(|(tn, cn, _)| *tn == t && *cn == c)
            .map(|(_, _, i)| *i)
            .expect("foreign key endpoint declared")
    };
    let fks: Vec<_> = db.foreign_keys.iter().map(|(t, c, rt, rc)| json!([find(t, c), find(rt, rc)])).collect();
    let lowered: Vec<_> = column_names
        .iter()
        .map(|v| json!([v[0], v[1].as_str().unwrap().to_lowercase().replace('_', " ")]))
        .collect();
    json!({
        "db_id": db.db_id,
        "table_names_original": db.tables.iter().map(|t| t.name).collect::<Vec<_>>(),
        "table_names": db.tables.iter().map(|t| t.name.to_lowercase().replace('_', " ")).collect::<Vec<_>>(),
        "column_names_original": column_names,
        "column_names": lowered,
        "column_types": column_types,
        "primary_keys": primary_keys,
        "foreign_keys": fks,
    })
}

fn create_database(db: &Database, path: &Path) -> rusqlite::Result<()> {
    if path.exists() {
        fs::remove_file(path).map_err(|e| rusqlite::Error::ToSqlConversionFailure(Box::new(e)))?;
    }
    let conn = Connection::open(path)?;
    let mut script = String::from("BEGIN;\n");
    for t in db.tables {
        let cols: Vec<String> = t.columns.iter().map(|(c, ty)| format!("\"{c}\" {ty}")).collect();
        script.push_str(&format!("CREATE TABLE \"{}\" ({});\n", t.name, cols.join(", ")));
        script.push_str(&format!("INSERT INTO \"{}\" VALUES {};\n", t.name, t.rows));
    }
    script.push_str("COMMIT;\n");
    conn.execute_batch(&script)
}

/// Writes `dev.json`, `tables.json` and `database/<db>/<db>.sqlite` under `dir`.
pub fn build_spider_fixture(dir: &Path) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let tables: Vec<_> = DATABASES.iter().map(|d| tables_entry(d)).collect();
    fs::write(dir.join("tables.json"), serde_json::to_string_pretty(&tables)?)?;
    let dev: Vec<_> = QUESTIONS
        .iter()
        .map(|(db, q, sql)| json!({"db_id": db, "question": q, "query": sql}))
        .collect();
    fs::write(dir.join("dev.json"), serde_json::to_string_pretty(&dev)?)?;
    for db in DATABASES {
        let sub = dir.join("database").join(db.db_id);
        fs::create_dir_all(&sub)?;
        create_database(db, &sub.join(format!("{}.sqlite", db.db_id))).map_err(io::Error::other)?;
    }
    Ok(())
}

fn strip_semicolon(sql: &str) -> &str {
    sql.trim().trim_end_matches(';').trim_end()
}

/// Candidate outputs of varying quality for one gold query.
fn sample_menu(qid: usize, gold: &str) -> Vec<(String, u32)> {
    let g = strip_semicolon(gold);
    let mut menu = vec![
        (gold.to_string(), 40),
        (format!("```sql\n{}\n```", g.split_whitespace().collect::<Vec<_>>().join(" ")), 20),
        (format!("SELECT * FROM ({g}) AS sub"), 15),
        ("SELECT 1".to_string(), 10),
        ("SELECT * FROM no_such_table".to_string(), 8),
        ("SELECT FROM WHERE".to_string(), 7),
    ];
    match qid {
        22 => menu.push((MIN_HORSEPOWER_SUBQUERY.to_string(), 30)),
        5 | 6 => menu.push(("SELECT Country, COUNT(Singer_ID)\nFROM singer\nGROUP BY Country;".to_string(), 30)),
        _ => {}
    }
    menu
}

fn draw(rng: &mut ChaCha8Rng, menu: &[(String, u32)]) -> String {
    let total: u32 = menu.iter().map(|(_, w)| w).sum();
    let mut x = rng.gen_range(0..total);
    for (s, w) in menu {
        if x < *w {
            return s.clone();
        }
        x -= w;
    }
    unreachable!()
}

/// Seeded records for every fixture question; the first `families`
/// questions also get two paraphrase variants each.
pub fn synthetic_records(model: &str, k: usize, seed: u64, families: usize) -> Vec<GenerationRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let record = |id: String, db: &str, question: String, gold: &str, samples: Vec<String>| GenerationRecord {
        version: RECORD_VERSION,
        question_id: id,
        db_id: db.to_string(),
        question,
        gold_sql: gold.to_string(),
        model: model.to_string(),
        decoding: Decoding { temperature: 1.0, k },
        samples,
        variant_of: None,
        perturbation_kind: None,
    };
    for (i, (db, q, gold)) in QUESTIONS.iter().enumerate() {
        let menu = sample_menu(i, gold);
        let samples = (0..k).map(|_| draw(&mut rng, &menu)).collect();
        out.push(record(i.to_string(), db, q.to_string(), gold, samples));
        if i < families {
            for v in 1..=2 {
                let samples = (0..k).map(|_| draw(&mut rng, &menu)).collect();
                let mut r = record(format!("{i}-p{v}"), db, format!("{q} (paraphrase {v})"), gold, samples);
                r.variant_of = Some(i.to_string());
                r.perturbation_kind = Some(PerturbationKind::Paraphrase);
                out.push(r);
            }
        }
    }
    out
}

/// Writes records as JSONL.
pub fn write_records(path: &Path, records: &[GenerationRecord]) -> io::Result<()> {
    let mut text = String::new();
    for r in records {
        text.push_str(&serde_json::to_string(r)?);
        text.push('\n');
    }
    fs::write(path, text)
}
