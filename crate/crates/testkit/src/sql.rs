//! Static checks over emitted DDL and hand-written queries, using an
//! off-the-shelf ANSI SQL parser.
//!
//! Identifiers are compared the way SQL resolves them: unquoted names fold
//! to upper case, quoted names are taken verbatim.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::ControlFlow;

use sqlparser::ast::{
    AlterTableOperation, Expr, Ident, ObjectName, ObjectNamePart, SelectItem, Statement,
    TableConstraint, TableFactor, Visit, Visitor,
};
use sqlparser::dialect::AnsiDialect;
use sqlparser::parser::Parser;

fn norm(ident: &Ident) -> String {
    if ident.quote_style.is_some() {
        ident.value.clone()
    } else {
        ident.value.to_uppercase()
    }
}

fn object_norm(name: &ObjectName) -> String {
    name.0
        .last()
        .map(|p| match p {
            ObjectNamePart::Identifier(i) => norm(i),
            other => other.to_string(),
        })
        .unwrap_or_default()
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Table {
    pub columns: BTreeSet<String>,
    pub primary_key: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForeignKey {
    pub table: String,
    pub columns: Vec<String>,
    pub target: String,
    pub target_columns: Vec<String>,
}

#[derive(Debug, Clone, Default)]
pub struct Schema {
    pub tables: BTreeMap<String, Table>,
    pub foreign_keys: Vec<ForeignKey>,
}

impl Schema {
    /// Parses DDL text with the ANSI dialect and collects tables, primary
    /// keys and foreign keys (inline or via `ALTER TABLE ... ADD`).
    pub fn parse(ddl: &str) -> Result<Schema, String> {
        let statements = Parser::parse_sql(&AnsiDialect {}, ddl).map_err(|e| e.to_string())?;
        let mut schema = Schema::default();
        for stmt in &statements {
            match stmt {
                Statement::CreateTable(ct) => {
                    let name = object_norm(&ct.name);
                    let mut table = Table {
                        columns: ct.columns.iter().map(|c| norm(&c.name)).collect(),
                        primary_key: Vec::new(),
                    };
                    for c in &ct.constraints {
                        schema.constraint(&name, &mut table, c);
                    }
                    if schema.tables.insert(name.clone(), table).is_some() {
                        return Err(format!("table {name} created twice"));
                    }
                }
                Statement::AlterTable(at) => {
                    let name = object_norm(&at.name);
                    let mut table = schema
                        .tables
                        .remove(&name)
                        .ok_or_else(|| format!("ALTER TABLE on unknown table {name}"))?;
                    for op in &at.operations {
                        match op {
                            AlterTableOperation::AddConstraint { constraint, .. } => {
                                schema.constraint(&name, &mut table, constraint)
                            }
                            other => return Err(format!("unexpected ALTER operation: {other}")),
                        }
                    }
                    schema.tables.insert(name, table);
                }
                other => return Err(format!("unexpected statement: {other}")),
            }
        }
        Ok(schema)
    }

    fn constraint(&mut self, table_name: &str, table: &mut Table, c: &TableConstraint) {
        match c {
            TableConstraint::PrimaryKey(pk) => {
                table.primary_key = pk
                    .columns
                    .iter()
                    .map(|c| match &c.column.expr {
                        Expr::Identifier(id) => norm(id),
                        other => other.to_string(),
                    })
                    .collect();
            }
            TableConstraint::ForeignKey(fk) => self.foreign_keys.push(ForeignKey {
                table: table_name.to_string(),
                columns: fk.columns.iter().map(norm).collect(),
                target: object_norm(&fk.foreign_table),
                target_columns: fk.referred_columns.iter().map(norm).collect(),
            }),
            _ => {}
        }
    }

    /// Problems with referential closure: foreign keys whose columns do not
    /// exist, or whose target is not an emitted table's primary key. Empty
    /// when closed.
    pub fn referential_problems(&self) -> Vec<String> {
        let mut problems = Vec::new();
        for (name, t) in &self.tables {
            for c in &t.primary_key {
                if !t.columns.contains(c) {
                    problems.push(format!("{name}: primary key column {c} is not declared"));
                }
            }
        }
        for fk in &self.foreign_keys {
            let Some(owner) = self.tables.get(&fk.table) else {
                problems.push(format!("foreign key on unknown table {}", fk.table));
                continue;
            };
            for c in &fk.columns {
                if !owner.columns.contains(c) {
                    problems.push(format!("{}.{c}: foreign key column is not declared", fk.table));
                }
            }
            match self.tables.get(&fk.target) {
                None => problems.push(format!(
                    "{}.{:?} references unknown table {}",
                    fk.table, fk.columns, fk.target
                )),
                Some(target) if target.primary_key != fk.target_columns => problems.push(format!(
                    "{}.{:?} references {}{:?}, which is not its primary key {:?}",
                    fk.table, fk.columns, fk.target, fk.target_columns, target.primary_key
                )),
                Some(_) => {}
            }
        }
        problems
    }

    /// Columns that look like foreign keys (`*_ID`) but have no constraint.
    pub fn unconstrained_id_columns(&self) -> Vec<String> {
        let constrained: BTreeSet<(String, String)> = self
            .foreign_keys
            .iter()
            .flat_map(|fk| fk.columns.iter().map(move |c| (fk.table.clone(), c.clone())))
            .collect();
        let mut out = Vec::new();
        for (name, t) in &self.tables {
            for c in &t.columns {
                if c.ends_with("_ID") && !constrained.contains(&(name.clone(), c.clone())) {
                    out.push(format!("{name}.{c}"));
                }
            }
        }
        out
    }
}

#[derive(Default)]
struct NameCollector {
    /// alias or table name → table name
    scopes: BTreeMap<String, String>,
    tables: Vec<String>,
    select_aliases: BTreeSet<String>,
    columns: Vec<(Option<String>, String)>,
}

impl Visitor for NameCollector {
    type Break = ();

    fn pre_visit_table_factor(&mut self, tf: &TableFactor) -> ControlFlow<()> {
        if let TableFactor::Table { name, alias, .. } = tf {
            let table = object_norm(name);
            self.tables.push(table.clone());
            self.scopes.insert(table.clone(), table.clone());
            if let Some(a) = alias {
                self.scopes.insert(norm(&a.name), table);
            }
        }
        ControlFlow::Continue(())
    }

    fn pre_visit_select(&mut self, select: &sqlparser::ast::Select) -> ControlFlow<()> {
        for item in &select.projection {
            if let SelectItem::ExprWithAlias { alias, .. } = item {
                self.select_aliases.insert(norm(alias));
            }
        }
        ControlFlow::Continue(())
    }

    fn pre_visit_expr(&mut self, expr: &Expr) -> ControlFlow<()> {
        match expr {
            Expr::Identifier(id) => self.columns.push((None, norm(id))),
            Expr::CompoundIdentifier(parts) if parts.len() >= 2 => {
                let col = norm(&parts[parts.len() - 1]);
                let qualifier = norm(&parts[parts.len() - 2]);
                self.columns.push((Some(qualifier), col));
            }
            _ => {}
        }
        ControlFlow::Continue(())
    }
}

/// Outcome of checking one query against a schema.
#[derive(Debug, Clone)]
pub struct QueryCheck {
    /// First line of the query, for reporting.
    pub head: String,
    pub tables: BTreeSet<String>,
    pub problems: Vec<String>,
}

/// Parses every statement in `queries` and resolves each table and column
/// reference against `schema`.
pub fn check_queries(schema: &Schema, queries: &str) -> Result<Vec<QueryCheck>, String> {
    let statements = Parser::parse_sql(&AnsiDialect {}, queries).map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    for stmt in &statements {
        let mut names = NameCollector::default();
        let _ = stmt.visit(&mut names);
        let mut problems = Vec::new();
        for t in &names.tables {
            if !schema.tables.contains_key(t) {
                problems.push(format!("unknown table {t}"));
            }
        }
        for (qualifier, col) in &names.columns {
            match qualifier {
                Some(q) => match names.scopes.get(q) {
                    None => problems.push(format!("unknown table or alias {q} (in {q}.{col})")),
                    Some(t) => {
                        if let Some(table) = schema.tables.get(t) {
                            if !table.columns.contains(col) {
                                problems.push(format!("unknown column {t}.{col}"));
                            }
                        }
                    }
                },
                None => {
                    let known = names.select_aliases.contains(col)
                        || names
                            .tables
                            .iter()
                            .filter_map(|t| schema.tables.get(t))
                            .any(|t| t.columns.contains(col));
                    if !known {
                        problems.push(format!("unknown column {col}"));
                    }
                }
            }
        }
        let head = stmt.to_string().chars().take(60).collect();
        out.push(QueryCheck {
            head,
            tables: names.tables.into_iter().collect(),
            problems,
        });
    }
    Ok(out)
}
