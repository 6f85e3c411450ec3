//! ANSI SQL DDL for reduced ER models.
//!
//! One table per entity. Entity keys become `id INTEGER` primary keys,
//! association tables take the composite key of their identifying links, and
//! every link or direct relationship becomes a foreign key column on its
//! "one" side. Constraints are added after all tables exist, so table order
//! never matters. Minimum participation cannot be expressed in plain DDL and
//! appears as a comment above each foreign key column.

use std::collections::BTreeSet;
use std::fmt::Write;

use crate::ast::Domain;
use crate::erm::{Cardinality, ERModel, EntityType, Stage};
use crate::error::EmitError;
use crate::translate::snake;

/// Reserved words of SQL:2016 (and a few widespread extras). Identifiers in
/// this list are emitted double-quoted.
const RESERVED: &[&str] = &[
    "ABS", "ALL", "ALLOCATE", "ALTER", "AND", "ANY", "ARE", "ARRAY", "AS", "ASENSITIVE",
    "ASYMMETRIC", "AT", "ATOMIC", "AUTHORIZATION", "AVG", "BEGIN", "BETWEEN", "BIGINT",
    "BINARY", "BLOB", "BOOLEAN", "BOTH", "BY", "CALL", "CALLED", "CARDINALITY", "CASCADED",
    "CASE", "CAST", "CEIL", "CEILING", "CHAR", "CHARACTER", "CHECK", "CLOB", "CLOSE",
    "COALESCE", "COLLATE", "COLLECT", "COLUMN", "COMMIT", "CONDITION", "CONNECT",
    "CONSTRAINT", "CONVERT", "CORR", "CORRESPONDING", "COUNT", "COVAR_POP", "COVAR_SAMP",
    "CREATE", "CROSS", "CUBE", "CUME_DIST", "CURRENT", "CURRENT_DATE", "CURRENT_TIME",
    "CURRENT_TIMESTAMP", "CURRENT_USER", "CURSOR", "CYCLE", "DATE", "DAY", "DEALLOCATE",
    "DEC", "DECIMAL", "DECLARE", "DEFAULT", "DELETE", "DENSE_RANK", "DEREF", "DESCRIBE",
    "DETERMINISTIC", "DISCONNECT", "DISTINCT", "DOUBLE", "DROP", "DYNAMIC", "EACH",
    "ELEMENT", "ELSE", "END", "ESCAPE", "EVERY", "EXCEPT", "EXEC", "EXECUTE", "EXISTS", "EXP",
    "EXTERNAL", "EXTRACT", "FALSE", "FETCH", "FILTER", "FLOAT", "FLOOR", "FOR", "FOREIGN",
    "FREE", "FROM", "FULL", "FUNCTION", "FUSION", "GET", "GLOBAL", "GRANT", "GROUP",
    "GROUPING", "HAVING", "HOLD", "HOUR", "IDENTITY", "IN", "INDICATOR", "INNER", "INOUT",
    "INSENSITIVE", "INSERT", "INT", "INTEGER", "INTERSECT", "INTERSECTION", "INTERVAL",
    "INTO", "IS", "JOIN", "KEY", "LANGUAGE", "LARGE", "LATERAL", "LEADING", "LEFT", "LIKE",
    "LIMIT", "LN", "LOCAL", "LOCALTIME", "LOCALTIMESTAMP", "LOWER", "MATCH", "MAX", "MEMBER",
    "MERGE", "METHOD", "MIN", "MINUTE", "MOD", "MODIFIES", "MODULE", "MONTH", "MULTISET",
    "NATIONAL", "NATURAL", "NCHAR", "NCLOB", "NEW", "NO", "NONE", "NORMALIZE", "NOT", "NULL",
    "NULLIF", "NUMERIC", "OCTET_LENGTH", "OF", "OFFSET", "OLD", "ON", "ONLY", "OPEN", "OR",
    "ORDER", "OUT", "OUTER", "OVER", "OVERLAPS", "OVERLAY", "PARAMETER", "PARTITION",
    "PERCENT", "PERCENTILE_CONT", "PERCENTILE_DISC", "PERCENT_RANK", "POSITION", "POWER",
    "PRECISION", "PREPARE", "PRIMARY", "PROCEDURE", "RANGE", "RANK", "READS", "REAL",
    "RECURSIVE", "REF", "REFERENCES", "REFERENCING", "RELEASE", "RESULT", "RETURN",
    "RETURNS", "REVOKE", "RIGHT", "ROLLBACK", "ROLLUP", "ROW", "ROWS", "ROW_NUMBER",
    "SAVEPOINT", "SCOPE", "SCROLL", "SEARCH", "SECOND", "SELECT", "SENSITIVE",
    "SESSION_USER", "SET", "SIMILAR", "SMALLINT", "SOME", "SPECIFIC", "SPECIFICTYPE", "SQL",
    "SQLEXCEPTION", "SQLSTATE", "SQLWARNING", "SQRT", "START", "STATIC", "STDDEV_POP",
    "STDDEV_SAMP", "SUBMULTISET", "SUBSTRING", "SUM", "SYMMETRIC", "SYSTEM", "SYSTEM_USER",
    "TABLE", "TABLESAMPLE", "THEN", "TIME", "TIMESTAMP", "TIMEZONE_HOUR", "TIMEZONE_MINUTE",
    "TO", "TRAILING", "TRANSLATE", "TRANSLATION", "TREAT", "TRIGGER", "TRIM", "TRUE",
    "UESCAPE", "UNION", "UNIQUE", "UNKNOWN", "UNNEST", "UPDATE", "UPPER", "USER", "USING",
    "VALUE", "VALUES", "VARCHAR", "VARYING", "VAR_POP", "VAR_SAMP", "WHEN", "WHENEVER",
    "WHERE", "WIDTH_BUCKET", "WINDOW", "WITH", "WITHIN", "WITHOUT", "YEAR",
];

fn is_reserved(word: &str) -> bool {
    let upper = word.to_ascii_uppercase();
    RESERVED.binary_search(&upper.as_str()).is_ok()
}

fn sql_ident(word: &str) -> String {
    let plain = word
        .chars()
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic())
        && word.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    if plain && !is_reserved(word) {
        word.to_string()
    } else {
        format!("\"{}\"", word.replace('"', "\"\""))
    }
}

/// Table name for an entity: `D-T` → `D_T`, `WordType` → `WORD_TYPE`.
pub fn table_name(entity: &str) -> String {
    snake(entity).to_ascii_uppercase()
}

/// Column name for an attribute or key.
pub fn column_name(attr: &str) -> String {
    snake(attr)
}

fn sql_type(d: Domain) -> &'static str {
    match d {
        Domain::Real => "DOUBLE PRECISION",
        Domain::Int => "INTEGER",
        Domain::Bit => "BOOLEAN",
    }
}

struct Column {
    name: String,
    ty: &'static str,
    not_null: bool,
    comment: Option<String>,
}

struct ForeignKey {
    table: String,
    column: String,
    target: String,
    target_key: Vec<String>,
}

struct Table {
    name: String,
    columns: Vec<Column>,
    primary_key: Vec<String>,
    used: BTreeSet<String>,
}

impl Table {
    fn new(entity: &EntityType) -> Self {
        Self {
            name: table_name(&entity.name),
            columns: Vec::new(),
            primary_key: Vec::new(),
            used: BTreeSet::new(),
        }
    }

    /// Adds a column, suffixing `_2`, `_3`, ... on clashes. Returns the name used.
    fn add(&mut self, base: String, ty: &'static str, not_null: bool, comment: Option<String>) -> String {
        let mut name = base.clone();
        let mut n = 2;
        while !self.used.insert(name.clone()) {
            name = format!("{base}_{n}");
            n += 1;
        }
        self.columns.push(Column {
            name: name.clone(),
            ty,
            not_null,
            comment,
        });
        name
    }
}

fn key_columns(entity: &EntityType) -> Vec<String> {
    entity.key_attrs.iter().map(|k| column_name(k)).collect()
}

fn participation(table: &str, card: Cardinality, other: &str) -> String {
    format!("each {other} row relates to {card} {table} rows")
}

pub fn emit_ddl(erm: &ERModel) -> Result<String, EmitError> {
    if erm.stage != Stage::Reduced {
        return Err(EmitError::NotReduced {
            stage: erm.stage.as_str().into(),
        });
    }
    let mut erm = erm.clone();
    erm.canonicalize();

    let mut tables: Vec<Table> = Vec::new();
    let mut fks: Vec<ForeignKey> = Vec::new();
    let index_of = |tables: &Vec<Table>, entity: &str| {
        let name = table_name(entity);
        tables.iter().position(|t| t.name == name)
    };

    for entity in &erm.entities {
        let mut table = Table::new(entity);
        for key in key_columns(entity) {
            let col = table.add(key, "INTEGER", true, None);
            table.primary_key.push(col);
        }
        tables.push(table);
    }

    // Association links: key (if identifying) and foreign key columns.
    for entity in erm.associations() {
        let ti = index_of(&tables, &entity.name).expect("association has a table");
        for link in erm.links_of(&entity.name) {
            let target = erm
                .entity(&link.target)
                .ok_or_else(|| EmitError::ManyToManyDirect { name: link.id.clone() })?;
            let base = format!(
                "{}_id",
                link.role.clone().unwrap_or_else(|| snake(&link.target))
            );
            let comment = participation(&tables[ti].name, link.card_target, &table_name(&link.target));
            let col = tables[ti].add(base, "INTEGER", true, Some(comment));
            if link.identifying {
                tables[ti].primary_key.push(col.clone());
            }
            fks.push(ForeignKey {
                table: tables[ti].name.clone(),
                column: col,
                target: table_name(&target.name),
                target_key: key_columns(target),
            });
        }
    }

    // Direct relationships: the foreign key sits on the side that relates
    // to at most one instance of the other.
    for rel in &erm.direct_rels {
        let (holder, card_holder, target, card_target, role) = if rel.card_a.is_at_most_one() {
            (&rel.a, rel.card_a, &rel.b, rel.card_b, rel.role.clone())
        } else if rel.card_b.is_at_most_one() {
            (&rel.b, rel.card_b, &rel.a, rel.card_a, None)
        } else {
            return Err(EmitError::ManyToManyDirect {
                name: rel.name.clone(),
            });
        };
        let target_entity = erm
            .entity(target)
            .ok_or_else(|| EmitError::ManyToManyDirect { name: rel.name.clone() })?;
        let ti = index_of(&tables, holder)
            .ok_or_else(|| EmitError::ManyToManyDirect { name: rel.name.clone() })?;
        let base = format!("{}_id", role.unwrap_or_else(|| snake(target)));
        let comment = format!(
            "{}: {}",
            rel.name,
            participation(&tables[ti].name, card_target, &table_name(target))
        );
        let col = tables[ti].add(base, "INTEGER", card_holder.min > 0, Some(comment));
        fks.push(ForeignKey {
            table: tables[ti].name.clone(),
            column: col,
            target: table_name(target),
            target_key: key_columns(target_entity),
        });
    }

    for entity in &erm.entities {
        let ti = index_of(&tables, &entity.name).expect("entity has a table");
        for attr in &entity.attrs {
            tables[ti].add(column_name(&attr.name), sql_type(attr.domain), false, None);
        }
    }

    let mut out = String::new();
    writeln!(out, "-- Schema for model {}", erm.name).unwrap();
    for (entity, table) in erm.entities.iter().zip(&tables) {
        out.push('\n');
        if entity.key_attrs.is_empty() && !entity.is_association {
            out.push_str("-- Single-row table.\n");
        }
        writeln!(out, "CREATE TABLE {} (", sql_ident(&table.name)).unwrap();
        let mut lines: Vec<String> = Vec::new();
        for col in &table.columns {
            let mut line = String::new();
            if let Some(c) = &col.comment {
                writeln!(line, "    -- {c}").unwrap();
            }
            write!(line, "    {} {}", sql_ident(&col.name), col.ty).unwrap();
            if col.not_null {
                line.push_str(" NOT NULL");
            }
            lines.push(line);
        }
        if !table.primary_key.is_empty() {
            let cols: Vec<String> = table.primary_key.iter().map(|c| sql_ident(c)).collect();
            lines.push(format!("    PRIMARY KEY ({})", cols.join(", ")));
        }
        out.push_str(&lines.join(",\n"));
        out.push_str("\n);\n");
    }

    if !fks.is_empty() {
        out.push('\n');
    }
    for fk in &fks {
        // Targets without a key (the single-row table) cannot be referenced.
        if fk.target_key.len() != 1 {
            continue;
        }
        let constraint = format!("fk_{}_{}", fk.table.to_ascii_lowercase(), fk.column);
        writeln!(
            out,
            "ALTER TABLE {} ADD CONSTRAINT {} FOREIGN KEY ({}) REFERENCES {} ({});",
            sql_ident(&fk.table),
            sql_ident(&constraint),
            sql_ident(&fk.column),
            sql_ident(&fk.target),
            sql_ident(&fk.target_key[0]),
        )
        .unwrap();
    }
    Ok(out)
}
