//! Combinatorial structure of the zero block `P`: strongly connected
//! components, period, and the two canonical layouts used by the continuity
//! analysis (block-cyclic for periodic `P`, upper block-triangular with
//! terminal classes for reducible `P`).
//!
//! The directed graph has an edge `i -> j` iff `P[i][j] > 0` exactly.

use std::collections::VecDeque;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral;
use crate::stochastic::Permutation;
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Classification {
    Primitive,
    IrreduciblePeriodic { period: usize },
    Reducible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureReport {
    /// Strongly connected components (0-based indices), each sorted, ordered
    /// by smallest member.
    pub scc_partition: Vec<Vec<usize>>,
    pub is_irreducible: bool,
    /// Defined only for irreducible matrices.
    pub period: Option<usize>,
    pub is_primitive: bool,
    pub classification: Classification,
}

pub(crate) fn adjacency(p: &DMatrix<f64>) -> Vec<Vec<usize>> {
    let n = p.nrows();
    (0..n)
        .map(|i| (0..n).filter(|&j| p[(i, j)] > 0.0).collect())
        .collect()
}

/// Tarjan's algorithm without recursion. Components come out in reverse
/// topological order of the condensation (sinks first).
pub(crate) fn tarjan_scc(graph: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = graph.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comps = Vec::new();
    let mut counter = 0;
    // (vertex, next edge position)
    let mut call: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        call.push((root, 0));
        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            if *pos == 0 && index[v] == usize::MAX {
                index[v] = counter;
                low[v] = counter;
                counter += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            if let Some(&w) = graph[v].get(*pos) {
                *pos += 1;
                if index[w] == usize::MAX {
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comp.sort_unstable();
                comps.push(comp);
            }
        }
    }
    comps
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// BFS levels from `start` restricted to `members`, and the gcd of
/// `level(u) + 1 - level(v)` over edges inside `members`. A component
/// without internal edges has no cycle and gets period `None`.
fn bfs_period(graph: &[Vec<usize>], members: &[usize], start: usize) -> (Vec<usize>, Option<usize>) {
    let n = graph.len();
    let mut inside = vec![false; n];
    for &v in members {
        inside[v] = true;
    }
    let mut level = vec![usize::MAX; n];
    level[start] = 0;
    let mut queue = VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        for &v in &graph[u] {
            if inside[v] && level[v] == usize::MAX {
                level[v] = level[u] + 1;
                queue.push_back(v);
            }
        }
    }
    let mut g = 0;
    for &u in members {
        for &v in &graph[u] {
            if inside[v] {
                let diff = (level[u] + 1).abs_diff(level[v]);
                g = gcd(g, diff);
            }
        }
    }
    let has_edge = members.iter().any(|&u| graph[u].iter().any(|&v| inside[v]));
    (level, if has_edge { Some(g) } else { None })
}

/// Period of an irreducible set of states, or `None` if it has no cycle.
pub(crate) fn component_period(graph: &[Vec<usize>], members: &[usize]) -> Option<usize> {
    bfs_period(graph, members, members[0]).1
}

/// Classifies a square nonnegative matrix.
pub fn classify(p: &DMatrix<f64>) -> StructureReport {
    let graph = adjacency(p);
    let mut sccs = tarjan_scc(&graph);
    sccs.sort_by_key(|c| c[0]);
    let period = if sccs.len() == 1 {
        component_period(&graph, &sccs[0])
    } else {
        None
    };
    let is_irreducible = period.is_some();
    let classification = match period {
        Some(1) => Classification::Primitive,
        Some(h) => Classification::IrreduciblePeriodic { period: h },
        None => Classification::Reducible,
    };
    StructureReport {
        scc_partition: sccs,
        is_irreducible,
        period,
        is_primitive: period == Some(1),
        classification,
    }
}

/// Block-cyclic layout of an irreducible periodic matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CyclicForm {
    pub h: usize,
    /// Cyclic classes in order; class 0 contains state 0. Edges go from
    /// class `c` to class `c + 1 mod h`.
    pub classes: Vec<Vec<usize>>,
    /// `blocks[c]` is `P` restricted to rows of class `c` and columns of
    /// class `c + 1 mod h`.
    pub blocks: Vec<DMatrix<f64>>,
    /// Sends each state to its position in the concatenated class order.
    pub perm: Permutation,
}

impl CyclicForm {
    /// The class index of every state.
    pub fn class_of(&self) -> Vec<usize> {
        let n = self.perm.len();
        let mut out = vec![0; n];
        for (c, members) in self.classes.iter().enumerate() {
            for &v in members {
                out[v] = c;
            }
        }
        out
    }
}

pub fn cyclic_normal_form(p: &DMatrix<f64>) -> Result<CyclicForm> {
    let report = classify(p);
    let h = match report.classification {
        Classification::IrreduciblePeriodic { period } => period,
        Classification::Primitive => return Err(Error::NotPeriodic),
        Classification::Reducible => return Err(Error::NotIrreducible),
    };
    let graph = adjacency(p);
    let members: Vec<usize> = (0..p.nrows()).collect();
    let (level, _) = bfs_period(&graph, &members, 0);
    let mut classes = vec![Vec::new(); h];
    for v in 0..p.nrows() {
        classes[level[v] % h].push(v);
    }
    let blocks = (0..h)
        .map(|c| {
            let rows = &classes[c];
            let cols = &classes[(c + 1) % h];
            DMatrix::from_fn(rows.len(), cols.len(), |i, j| p[(rows[i], cols[j])])
        })
        .collect();
    let order: Vec<usize> = classes.iter().flatten().copied().collect();
    let perm = Permutation::new(order)?.inverse();
    Ok(CyclicForm {
        h,
        classes,
        blocks,
        perm,
    })
}

/// One terminal class of the condensation.
#[derive(Debug, Clone, PartialEq)]
pub struct FinalBlock {
    pub states: Vec<usize>,
    pub matrix: DMatrix<f64>,
    pub perron_value: f64,
    /// `None` for a single state without a self-loop.
    pub period: Option<usize>,
}

/// Upper block-triangular layout
///
/// ```text
/// ( T11 T12 ... T1c )
/// (  0  T22 ...  0  )
/// (  0   0  ... Tcc )
/// ```
///
/// where every non-terminal component is merged into `T11` and each terminal
/// component is one `Tii`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducibleForm {
    /// States of `T11` in topological order of their components.
    pub transient: Vec<usize>,
    pub transient_block: DMatrix<f64>,
    /// Spectral radius of `T11` (0 when empty).
    pub transient_perron: f64,
    /// `coupling_blocks[i]` is `T1,i+2`: transient rows, final block `i` columns.
    pub coupling_blocks: Vec<DMatrix<f64>>,
    pub final_blocks: Vec<FinalBlock>,
    pub lambda_max: f64,
    /// Indices into `final_blocks` whose Perron value attains `lambda_max`.
    pub dominating: Vec<usize>,
    pub perm: Permutation,
}

impl ReducibleForm {
    pub fn perron_values(&self) -> Vec<f64> {
        self.final_blocks.iter().map(|b| b.perron_value).collect()
    }
}

fn principal(p: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), idx.len(), |i, j| p[(idx[i], idx[j])])
}

/// Perron value of one strongly connected component.
pub(crate) fn component_perron(p: &DMatrix<f64>, graph: &[Vec<usize>], members: &[usize], tol: &Tolerances) -> Result<(f64, Option<usize>)> {
    let period = component_period(graph, members);
    match period {
        None => Ok((0.0, None)),
        Some(_) if members.len() == 1 => Ok((p[(members[0], members[0])], period)),
        Some(_) => Ok((spectral::perron(&principal(p, members), tol)?.lambda1, period)),
    }
}

pub fn reducible_canonical_form(p: &DMatrix<f64>, tol: &Tolerances) -> Result<ReducibleForm> {
    let graph = adjacency(p);
    let sccs = tarjan_scc(&graph);
    let report_irreducible = sccs.len() == 1 && component_period(&graph, &sccs[0]).is_some();
    if report_irreducible {
        return Err(Error::NotReducible);
    }
    let n = p.nrows();
    let mut comp_of = vec![0; n];
    for (c, members) in sccs.iter().enumerate() {
        for &v in members {
            comp_of[v] = c;
        }
    }
    let terminal: Vec<bool> = sccs
        .iter()
        .map(|members| {
            members
                .iter()
                .all(|&u| graph[u].iter().all(|&v| comp_of[v] == comp_of[u]))
        })
        .collect();

    // Tarjan emits sinks first, so the reverse is a topological order.
    let transient: Vec<usize> = sccs
        .iter()
        .enumerate()
        .rev()
        .filter(|(c, _)| !terminal[*c])
        .flat_map(|(_, m)| m.iter().copied())
        .collect();
    let mut transient_perron = 0.0_f64;
    for (c, members) in sccs.iter().enumerate() {
        if !terminal[c] {
            transient_perron = transient_perron.max(component_perron(p, &graph, members, tol)?.0);
        }
    }

    let mut finals: Vec<&Vec<usize>> = sccs
        .iter()
        .enumerate()
        .filter(|(c, _)| terminal[*c])
        .map(|(_, m)| m)
        .collect();
    finals.sort_by_key(|m| m[0]);
    let mut final_blocks = Vec::with_capacity(finals.len());
    for members in finals {
        let (perron_value, period) = component_perron(p, &graph, members, tol)?;
        final_blocks.push(FinalBlock {
            states: members.clone(),
            matrix: principal(p, members),
            perron_value,
            period,
        });
    }
    let lambda_max = final_blocks
        .iter()
        .map(|b| b.perron_value)
        .fold(0.0_f64, f64::max);
    let dominating = final_blocks
        .iter()
        .enumerate()
        .filter(|(_, b)| (b.perron_value - lambda_max).abs() <= tol.tol_cluster)
        .map(|(i, _)| i)
        .collect();
    let coupling_blocks = final_blocks
        .iter()
        .map(|b| DMatrix::from_fn(transient.len(), b.states.len(), |i, j| p[(transient[i], b.states[j])]))
        .collect();

    let order: Vec<usize> = transient
        .iter()
        .copied()
        .chain(final_blocks.iter().flat_map(|b| b.states.iter().copied()))
        .collect();
    let perm = Permutation::new(order)?.inverse();

    Ok(ReducibleForm {
        transient_block: principal(p, &transient),
        transient,
        transient_perron,
        coupling_blocks,
        final_blocks,
        lambda_max,
        dominating,
        perm,
    })
}
