use std::collections::{BTreeSet, HashMap};
use std::io::{self, Write};

use super::ast::{GraphPattern, Query, TermPattern, TriplePattern, Variable};
use crate::rdf::{Graph, Term, TermId};

type Row = Vec<Option<TermId>>;

/// A solution sequence: one row per solution, columns follow `variables`.
/// `None` marks an unbound variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solutions {
    pub variables: Vec<Variable>,
    pub rows: Vec<Vec<Option<Term>>>,
}

impl Solutions {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn distinct(&self) -> BTreeSet<Vec<Option<Term>>> {
        self.rows.iter().cloned().collect()
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name() == name)
    }

    /// Header line of `?var` names, then one tab-separated row per solution
    /// with terms in N-Triples syntax and empty cells for unbound variables.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let header: Vec<String> = self.variables.iter().map(ToString::to_string).collect();
        writeln!(out, "{}", header.join("\t"))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|c| c.as_ref().map(ToString::to_string).unwrap_or_default()).collect();
            writeln!(out, "{}", cells.join("\t"))?;
        }
        Ok(())
    }

    /// One JSON object per row mapping variable names to N-Triples terms.
    pub fn to_json(&self) -> serde_json::Value {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = serde_json::Map::new();
                for (v, cell) in self.variables.iter().zip(row) {
                    if let Some(t) = cell {
                        obj.insert(v.name().to_owned(), serde_json::Value::String(t.to_string()));
                    }
                }
                serde_json::Value::Object(obj)
            })
            .collect();
        serde_json::json!({
            "variables": self.variables.iter().map(|v| v.name()).collect::<Vec<_>>(),
            "rows": serde_json::Value::Array(rows),
        })
    }
}

/// A pattern position resolved against the graph's term table.
#[derive(Clone, Copy)]
enum Slot {
    Var(usize),
    Const(TermId),
}

struct Evaluator<'g> {
    graph: &'g Graph,
    slots: HashMap<Variable, usize>,
    width: usize,
}

impl Evaluator<'_> {
    /// `None` when a constant does not occur in the graph, so the pattern cannot match.
    fn resolve(&self, tp: &TriplePattern) -> Option<[Slot; 3]> {
        let slot = |pos: &TermPattern| match pos {
            TermPattern::Variable(v) => Some(Slot::Var(self.slots[v])),
            TermPattern::Term(t) => self.graph.id_of(t).map(Slot::Const),
        };
        Some([slot(&tp.subject)?, slot(&tp.predicate)?, slot(&tp.object)?])
    }

    fn bgp(&self, patterns: &[TriplePattern]) -> Vec<Row> {
        let mut resolved = Vec::with_capacity(patterns.len());
        for tp in patterns {
            match self.resolve(tp) {
                Some(r) => resolved.push(r),
                None => return Vec::new(),
            }
        }
        let mut rows = vec![vec![None; self.width]];
        let mut bound = vec![false; self.width];
        let mut remaining: Vec<[Slot; 3]> = resolved;
        while !remaining.is_empty() && !rows.is_empty() {
            // Greedy: most bound positions first, then fewest constant-only matches.
            let score = |r: &[Slot; 3]| {
                let fixed = r.iter().filter(|s| matches!(s, Slot::Const(_)) || matches!(s, Slot::Var(v) if bound[*v])).count();
                let consts = r.map(|s| match s {
                    Slot::Const(id) => Some(id),
                    Slot::Var(_) => None,
                });
                let estimate = if consts.iter().all(Option::is_none) {
                    self.graph.len()
                } else {
                    self.graph.match_ids(consts[0], consts[1], consts[2]).len()
                };
                (std::cmp::Reverse(fixed), estimate)
            };
            let best = (0..remaining.len()).min_by_key(|&i| score(&remaining[i])).unwrap();
            let pattern = remaining.swap_remove(best);
            let mut next = Vec::new();
            for row in &rows {
                let fixed = pattern.map(|s| match s {
                    Slot::Const(id) => Some(id),
                    Slot::Var(v) => row[v],
                });
                'matches: for m in self.graph.match_ids(fixed[0], fixed[1], fixed[2]) {
                    let mut out = row.clone();
                    for (slot, value) in pattern.iter().zip([m.s, m.p, m.o]) {
                        if let Slot::Var(v) = *slot {
                            match out[v] {
                                Some(existing) if existing != value => continue 'matches,
                                _ => out[v] = Some(value),
                            }
                        }
                    }
                    next.push(out);
                }
            }
            for s in pattern {
                if let Slot::Var(v) = s {
                    bound[v] = true;
                }
            }
            rows = next;
        }
        rows
    }

    fn eval(&self, gp: &GraphPattern) -> Vec<Row> {
        match gp {
            GraphPattern::Bgp(ps) => self.bgp(ps),
            GraphPattern::Union(a, b) => {
                let mut rows = self.eval(a);
                rows.extend(self.eval(b));
                rows
            }
            GraphPattern::Join(a, b) => {
                let left = self.eval(a);
                if left.is_empty() {
                    return left;
                }
                combine(&left, &self.eval(b), false)
            }
            GraphPattern::Optional(a, b) => {
                let left = self.eval(a);
                if left.is_empty() {
                    return left;
                }
                combine(&left, &self.eval(b), true)
            }
        }
    }
}

fn always_bound(rows: &[Row], width: usize) -> Vec<bool> {
    let mut bound = vec![true; width];
    for row in rows {
        for (b, cell) in bound.iter_mut().zip(row) {
            *b &= cell.is_some();
        }
    }
    bound
}

fn merge(a: &Row, b: &Row) -> Option<Row> {
    a.iter()
        .zip(b)
        .map(|(x, y)| match (x, y) {
            (Some(x), Some(y)) if x != y => Err(()),
            (Some(x), _) => Ok(Some(*x)),
            (None, y) => Ok(*y),
        })
        .collect::<Result<Row, ()>>()
        .ok()
}

/// Join (or left join when `keep_unmatched`) of two solution bags.
/// Hashes on the variables bound in every row of both sides.
fn combine(left: &[Row], right: &[Row], keep_unmatched: bool) -> Vec<Row> {
    let width = left[0].len();
    let (lb, rb) = (always_bound(left, width), always_bound(right, width));
    let key_slots: Vec<usize> = (0..width).filter(|&i| lb[i] && rb[i]).collect();
    let key = |row: &Row| -> Vec<TermId> { key_slots.iter().map(|&i| row[i].unwrap()).collect() };
    let mut buckets: HashMap<Vec<TermId>, Vec<&Row>> = HashMap::new();
    for row in right {
        buckets.entry(key(row)).or_default().push(row);
    }
    let mut out = Vec::new();
    for l in left {
        let mut matched = false;
        if let Some(candidates) = buckets.get(&key(l)) {
            for r in candidates {
                if let Some(m) = merge(l, r) {
                    out.push(m);
                    matched = true;
                }
            }
        }
        if keep_unmatched && !matched {
            out.push(l.clone());
        }
    }
    out
}

/// Evaluates a query with bag semantics, projection and optional DISTINCT.
/// Rows come back sorted by binding, unbound first, in interned-id order.
pub fn evaluate(graph: &Graph, query: &Query) -> Solutions {
    let body_vars = query.pattern.variables();
    let slots: HashMap<Variable, usize> = body_vars.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect();
    let evaluator = Evaluator { graph, slots, width: body_vars.len() };
    let rows = evaluator.eval(&query.pattern);

    let variables = query.projected_variables();
    let columns: Vec<Option<usize>> = variables.iter().map(|v| evaluator.slots.get(v).copied()).collect();
    let mut projected: Vec<Row> =
        rows.iter().map(|row| columns.iter().map(|c| c.and_then(|i| row[i])).collect()).collect();
    projected.sort_unstable();
    if query.distinct {
        projected.dedup();
    }
    let rows = projected
        .into_iter()
        .map(|row| row.into_iter().map(|c| c.map(|id| graph.term(id).clone())).collect())
        .collect();
    Solutions { variables, rows }
}
