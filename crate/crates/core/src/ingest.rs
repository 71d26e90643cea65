//! Read-only access to single-file SQLite databases (the form KaggleDBQA is
//! distributed in) plus a CSV import step that materializes CSV files into
//! one such database so every downstream consumer sees a single interface.

use std::fmt;
use std::io::Read;
use std::path::{Path, PathBuf};

use rusqlite::types::ValueRef;
use rusqlite::{Connection, OpenFlags};
use serde::{Deserialize, Serialize};
use thiserror::Error;

const SQLITE_MAGIC: &[u8; 16] = b"SQLite format 3\0";

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("file not found: {0}")]
    FileNotFound(PathBuf),
    #[error("not a database: {0}")]
    NotADatabase(PathBuf),
    #[error("unknown table: {0}")]
    UnknownTable(String),
    #[error("unknown column: {0}.{1}")]
    UnknownColumn(String, String),
    #[error("csv import failed for {path}: {message}")]
    CsvImport { path: PathBuf, message: String },
    #[error(transparent)]
    Sqlite(#[from] rusqlite::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// One cell value read from a table. Mirrors SQLite's storage classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Value {
    Null,
    Integer(i64),
    Real(f64),
    Text(String),
    Blob(Vec<u8>),
}

impl Value {
    /// Text rendering used by the profiler and prompt samples.
    /// Returns `None` for NULL so callers can skip or count missing values.
    pub fn as_text(&self) -> Option<String> {
        match self {
            Value::Null => None,
            Value::Integer(i) => Some(i.to_string()),
            Value::Real(r) => Some(render_real(*r)),
            Value::Text(t) => Some(t.clone()),
            Value::Blob(b) => Some(hex::encode(b)),
        }
    }

    pub fn is_null(&self) -> bool {
        matches!(self, Value::Null)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.as_text() {
            Some(t) => write!(f, "{t}"),
            None => write!(f, "NULL"),
        }
    }
}

fn render_real(r: f64) -> String {
    if r.fract() == 0.0 && r.abs() < 1e15 {
        format!("{}", r as i64)
    } else {
        format!("{r}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnDef {
    pub name: String,
    pub declared_type: String,
    pub nullable: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForeignKey {
    pub local_column: String,
    pub foreign_table: String,
    pub foreign_column: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableDef {
    pub name: String,
    pub columns: Vec<ColumnDef>,
    pub primary_key: Vec<String>,
    pub foreign_keys: Vec<ForeignKey>,
}

impl TableDef {
    pub fn column(&self, name: &str) -> Option<&ColumnDef> {
        self.columns
            .iter()
            .find(|c| c.name.eq_ignore_ascii_case(name))
    }
}

/// Declared structure of a database: tables in declaration order, columns in
/// declared order within each table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    pub tables: Vec<TableDef>,
}

impl Schema {
    pub fn table(&self, name: &str) -> Option<&TableDef> {
        self.tables
            .iter()
            .find(|t| t.name.eq_ignore_ascii_case(name))
    }

    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }

    /// All (table, column) pairs in schema order.
    pub fn all_columns(&self) -> impl Iterator<Item = (&TableDef, &ColumnDef)> {
        self.tables
            .iter()
            .flat_map(|t| t.columns.iter().map(move |c| (t, c)))
    }
}

/// The first rows of a table in natural storage order. Samples are
/// illustrative only; storage order carries no semantics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowSample {
    pub table: String,
    pub rows: Vec<Vec<Value>>,
    pub requested: usize,
}

/// Read-only handle on one database file. Single-threaded by design; open
/// one handle per worker.
pub struct DatabaseHandle {
    conn: Connection,
    path: PathBuf,
}

impl fmt::Debug for DatabaseHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DatabaseHandle")
            .field("path", &self.path)
            .finish()
    }
}

/// Opens `path` read-only, rejecting files that are not SQLite databases.
/// A zero-length file is a valid database with no tables.
pub fn open_database(path: impl AsRef<Path>) -> Result<DatabaseHandle, IngestError> {
    let path = path.as_ref();
    let meta =
        std::fs::metadata(path).map_err(|_| IngestError::FileNotFound(path.to_path_buf()))?;
    if meta.len() > 0 {
        let mut header = [0u8; 16];
        let mut file = std::fs::File::open(path)?;
        let n = file.read(&mut header)?;
        if n < 16 || &header != SQLITE_MAGIC {
            return Err(IngestError::NotADatabase(path.to_path_buf()));
        }
    }
    let conn = Connection::open_with_flags(path, OpenFlags::SQLITE_OPEN_READ_ONLY)?;
    Ok(DatabaseHandle {
        conn,
        path: path.to_path_buf(),
    })
}

impl DatabaseHandle {
    pub fn path(&self) -> &Path {
        &self.path
    }

    pub(crate) fn connection(&self) -> &Connection {
        &self.conn
    }

    fn resolve_table(&self, table: &str) -> Result<TableDef, IngestError> {
        extract_schema(self)?
            .table(table)
            .cloned()
            .ok_or_else(|| IngestError::UnknownTable(table.to_string()))
    }

    pub fn row_count(&self, table: &str) -> Result<usize, IngestError> {
        let def = self.resolve_table(table)?;
        let sql = format!("SELECT count(*) FROM {}", quote_ident(&def.name));
        let n: i64 = self.conn.query_row(&sql, [], |row| row.get(0))?;
        Ok(n as usize)
    }
}

fn quote_ident(name: &str) -> String {
    format!("\"{}\"", name.replace('"', "\"\""))
}

fn value_from_ref(v: ValueRef<'_>) -> Value {
    match v {
        ValueRef::Null => Value::Null,
        ValueRef::Integer(i) => Value::Integer(i),
        ValueRef::Real(r) => Value::Real(r),
        ValueRef::Text(t) => Value::Text(String::from_utf8_lossy(t).into_owned()),
        ValueRef::Blob(b) => Value::Blob(b.to_vec()),
    }
}

/// Extracts the declared schema. Deterministic: two calls on the same file
/// yield identical values. Foreign keys that reference a table or column
/// absent from the file are omitted so the returned schema always satisfies
/// its own invariants.
pub fn extract_schema(db: &DatabaseHandle) -> Result<Schema, IngestError> {
    let conn = db.connection();
    let mut stmt = conn.prepare(
        "SELECT name FROM sqlite_master WHERE type = 'table' AND name NOT LIKE 'sqlite_%'",
    )?;
    let names: Vec<String> = stmt
        .query_map([], |row| row.get::<_, String>(0))?
        .collect::<Result<_, _>>()?;

    let mut tables = Vec::with_capacity(names.len());
    for name in &names {
        let mut columns = Vec::new();
        let mut pk_cols: Vec<(i64, String)> = Vec::new();
        let mut info = conn.prepare(&format!("PRAGMA table_info({})", quote_ident(name)))?;
        let mut rows = info.query([])?;
        while let Some(row) = rows.next()? {
            let col_name: String = row.get("name")?;
            let declared_type: String = row.get("type")?;
            let notnull: i64 = row.get("notnull")?;
            let pk: i64 = row.get("pk")?;
            if pk > 0 {
                pk_cols.push((pk, col_name.clone()));
            }
            columns.push(ColumnDef {
                name: col_name,
                declared_type,
                nullable: notnull == 0,
            });
        }
        pk_cols.sort_by_key(|(ord, _)| *ord);
        tables.push(TableDef {
            name: name.clone(),
            columns,
            primary_key: pk_cols.into_iter().map(|(_, c)| c).collect(),
            foreign_keys: Vec::new(),
        });
    }

    // Foreign keys need the full table list so dangling edges can be dropped.
    let mut fks_by_table: Vec<Vec<ForeignKey>> = Vec::with_capacity(tables.len());
    for table in &tables {
        let mut fks = Vec::new();
        let mut stmt = conn.prepare(&format!(
            "PRAGMA foreign_key_list({})",
            quote_ident(&table.name)
        ))?;
        let mut rows = stmt.query([])?;
        while let Some(row) = rows.next()? {
            let foreign_table: String = row.get("table")?;
            let local_column: String = row.get("from")?;
            // "to" is NULL when the FK references the target's primary key.
            let foreign_column: Option<String> = row.get("to")?;
            let Some(target) = tables
                .iter()
                .find(|t| t.name.eq_ignore_ascii_case(&foreign_table))
            else {
                continue;
            };
            let foreign_column = match foreign_column {
                Some(c) => c,
                None => match target.primary_key.first() {
                    Some(c) => c.clone(),
                    None => continue,
                },
            };
            if target.column(&foreign_column).is_none() {
                continue;
            }
            fks.push(ForeignKey {
                local_column,
                foreign_table,
                foreign_column,
            });
        }
        fks_by_table.push(fks);
    }
    for (table, fks) in tables.iter_mut().zip(fks_by_table) {
        table.foreign_keys = fks;
    }

    Ok(Schema { tables })
}

/// First `min(n, rowCount)` rows of `table` in natural storage order.
pub fn sample_rows(db: &DatabaseHandle, table: &str, n: usize) -> Result<RowSample, IngestError> {
    let def = db.resolve_table(table)?;
    let mut rows = Vec::new();
    if n > 0 {
        let sql = format!("SELECT * FROM {} LIMIT {}", quote_ident(&def.name), n);
        let mut stmt = db.connection().prepare(&sql)?;
        let ncols = stmt.column_count();
        let mut result = stmt.query([])?;
        while let Some(row) = result.next()? {
            let mut tuple = Vec::with_capacity(ncols);
            for i in 0..ncols {
                tuple.push(value_from_ref(row.get_ref(i)?));
            }
            rows.push(tuple);
        }
    }
    Ok(RowSample {
        table: def.name,
        rows,
        requested: n,
    })
}

/// Values of one column in storage order, nulls included. `limit` of `None`
/// reads the whole column.
pub fn column_values(
    db: &DatabaseHandle,
    table: &str,
    column: &str,
    limit: Option<usize>,
) -> Result<Vec<Value>, IngestError> {
    let def = db.resolve_table(table)?;
    let col = def
        .column(column)
        .ok_or_else(|| IngestError::UnknownColumn(def.name.clone(), column.to_string()))?
        .clone();
    if limit == Some(0) {
        return Ok(Vec::new());
    }
    let mut sql = format!(
        "SELECT {} FROM {}",
        quote_ident(&col.name),
        quote_ident(&def.name)
    );
    if let Some(n) = limit {
        sql.push_str(&format!(" LIMIT {n}"));
    }
    let mut stmt = db.connection().prepare(&sql)?;
    let mut result = stmt.query([])?;
    let mut values = Vec::new();
    while let Some(row) = result.next()? {
        values.push(value_from_ref(row.get_ref(0)?));
    }
    Ok(values)
}

/// Materializes RFC-4180 CSV files (header row required) into a new SQLite
/// database at `db_path`, one table per file. Column types are inferred by
/// scanning values: all-integer columns become INTEGER, all-numeric REAL,
/// everything else TEXT. Empty fields import as NULL.
pub fn import_csv(
    db_path: impl AsRef<Path>,
    tables: &[(String, PathBuf)],
) -> Result<(), IngestError> {
    let conn = Connection::open(db_path.as_ref())?;
    for (table, csv_path) in tables {
        let mut reader = csv::Reader::from_path(csv_path).map_err(|e| IngestError::CsvImport {
            path: csv_path.clone(),
            message: e.to_string(),
        })?;
        let headers: Vec<String> = reader
            .headers()
            .map_err(|e| IngestError::CsvImport {
                path: csv_path.clone(),
                message: e.to_string(),
            })?
            .iter()
            .map(|h| h.trim().to_string())
            .collect();
        if headers.is_empty() {
            return Err(IngestError::CsvImport {
                path: csv_path.clone(),
                message: "missing header row".to_string(),
            });
        }
        let mut records: Vec<Vec<String>> = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| IngestError::CsvImport {
                path: csv_path.clone(),
                message: e.to_string(),
            })?;
            records.push(record.iter().map(|f| f.to_string()).collect());
        }

        let types: Vec<&str> = (0..headers.len())
            .map(|i| infer_sql_type(records.iter().map(|r| r.get(i).map(String::as_str))))
            .collect();
        let col_defs: Vec<String> = headers
            .iter()
            .zip(&types)
            .map(|(h, t)| format!("{} {}", quote_ident(h), t))
            .collect();
        conn.execute(
            &format!(
                "CREATE TABLE {} ({})",
                quote_ident(table),
                col_defs.join(", ")
            ),
            [],
        )?;

        let placeholders = vec!["?"; headers.len()].join(", ");
        let insert = format!(
            "INSERT INTO {} VALUES ({})",
            quote_ident(table),
            placeholders
        );
        let mut stmt = conn.prepare(&insert)?;
        for record in &records {
            let params: Vec<rusqlite::types::Value> = (0..headers.len())
                .map(|i| csv_field_to_sql(record.get(i).map(String::as_str), types[i]))
                .collect();
            stmt.execute(rusqlite::params_from_iter(params))?;
        }
    }
    Ok(())
}

fn infer_sql_type<'a>(values: impl Iterator<Item = Option<&'a str>>) -> &'static str {
    let mut all_int = true;
    let mut all_num = true;
    let mut seen = false;
    for v in values.flatten() {
        if v.is_empty() {
            continue;
        }
        seen = true;
        if v.parse::<i64>().is_err() {
            all_int = false;
        }
        if v.parse::<f64>().is_err() {
            all_num = false;
        }
    }
    match (seen, all_int, all_num) {
        (false, _, _) => "TEXT",
        (true, true, _) => "INTEGER",
        (true, false, true) => "REAL",
        _ => "TEXT",
    }
}

fn csv_field_to_sql(field: Option<&str>, ty: &str) -> rusqlite::types::Value {
    use rusqlite::types::Value as Sv;
    match field {
        None | Some("") => Sv::Null,
        Some(v) => match ty {
            "INTEGER" => v
                .parse::<i64>()
                .map(Sv::Integer)
                .unwrap_or_else(|_| Sv::Text(v.into())),
            "REAL" => v
                .parse::<f64>()
                .map(Sv::Real)
                .unwrap_or_else(|_| Sv::Text(v.into())),
            _ => Sv::Text(v.to_string()),
        },
    }
}
