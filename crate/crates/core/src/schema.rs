use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableSchema {
    pub table_name: String,
    pub columns: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForeignKey {
    pub source_table: String,
    pub source_column: String,
    pub target_table: String,
    pub target_column: String,
}

/// Tables, ordered columns and foreign keys of one database.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemaCatalog {
    pub db_id: String,
    pub tables: Vec<TableSchema>,
    pub foreign_keys: Vec<ForeignKey>,
}

/// The catalog as shown to a model: tables and foreign keys only.
#[derive(Serialize)]
struct PromptSchema<'a> {
    tables: &'a [TableSchema],
    foreign_keys: &'a [ForeignKey],
}

impl SchemaCatalog {
    pub fn table(&self, name: &str) -> Option<&TableSchema> {
        self.tables.iter().find(|t| t.table_name.eq_ignore_ascii_case(name))
    }

    /// Foreign keys whose endpoints are not declared tables/columns.
    pub fn dangling_foreign_keys(&self) -> Vec<&ForeignKey> {
        let has = |t: &str, c: &str| {
            self.table(t)
                .is_some_and(|t| t.columns.iter().any(|col| col.eq_ignore_ascii_case(c)))
        };
        self.foreign_keys
            .iter()
            .filter(|fk| !has(&fk.source_table, &fk.source_column) || !has(&fk.target_table, &fk.target_column))
            .collect()
    }

    /// Pretty JSON `{"tables": [...], "foreign_keys": [...]}` used in prompts.
    pub fn prompt_json(&self) -> String {
        serde_json::to_string_pretty(&PromptSchema {
            tables: &self.tables,
            foreign_keys: &self.foreign_keys,
        })
        .expect("schema serializes")
    }
}

#[cfg(test)]
pub(crate) fn stadium_catalog() -> SchemaCatalog {
    SchemaCatalog {
        db_id: "concert_singer".into(),
        tables: vec![
            TableSchema {
                table_name: "stadium".into(),
                columns: ["Stadium_ID", "Name", "Location", "Capacity", "Average"]
                    .map(String::from)
                    .to_vec(),
            },
            TableSchema {
                table_name: "concert".into(),
                columns: ["concert_ID", "Stadium_ID", "Year"].map(String::from).to_vec(),
            },
        ],
        foreign_keys: vec![ForeignKey {
            source_table: "concert".into(),
            source_column: "Stadium_ID".into(),
            target_table: "stadium".into(),
            target_column: "Stadium_ID".into(),
        }],
    }
}
