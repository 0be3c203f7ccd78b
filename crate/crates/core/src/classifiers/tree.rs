//! Binary CART classification tree with Gini impurity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TreeParams {
    /// `None` grows until leaves are pure or unsplittable.
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: Some(12),
            min_leaf: 1,
        }
    }
}

impl TreeParams {
    pub fn validate(&self) -> Result<()> {
        if self.min_leaf == 0 {
            return Err(Error::arg("tree min_leaf must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf {
        class: usize,
    },
    /// `x[feature] <= threshold` goes left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    nodes: Vec<Node>,
}

impl DecisionTree {
    pub fn predict(&self, x: &[f64]) -> usize {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { class } => return class,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

fn gini(counts: &[usize], total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let t = total as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / t).powi(2)).sum::<f64>()
}

fn majority(counts: &[usize]) -> usize {
    let mut best = 0;
    for (c, &n) in counts.iter().enumerate() {
        if n > counts[best] {
            best = c;
        }
    }
    best
}

/// Midpoint of two distinct sorted values that still separates them.
fn midpoint(a: f64, b: f64) -> f64 {
    let m = a + (b - a) / 2.0;
    if m < b {
        m
    } else {
        a
    }
}

struct Builder<'a> {
    rows: &'a [&'a [f64]],
    labels: &'a [usize],
    classes: usize,
    params: TreeParams,
    nodes: Vec<Node>,
}

struct Split {
    feature: usize,
    threshold: f64,
    gain: f64,
}

impl Builder<'_> {
    fn counts(&self, idx: &[usize]) -> Vec<usize> {
        let mut c = vec![0; self.classes];
        for &i in idx {
            c[self.labels[i]] += 1;
        }
        c
    }

    fn best_split(&self, idx: &[usize], parent: &[usize]) -> Option<Split> {
        let n = idx.len();
        let parent_gini = gini(parent, n);
        let d = self.rows[0].len();
        let mut best: Option<Split> = None;
        let mut sorted = idx.to_vec();
        for f in 0..d {
            sorted.sort_by(|&a, &b| self.rows[a][f].total_cmp(&self.rows[b][f]).then(a.cmp(&b)));
            let mut left = vec![0usize; self.classes];
            for i in 1..n {
                left[self.labels[sorted[i - 1]]] += 1;
                let (a, b) = (self.rows[sorted[i - 1]][f], self.rows[sorted[i]][f]);
                if a == b || i < self.params.min_leaf || n - i < self.params.min_leaf {
                    continue;
                }
                let right: Vec<usize> = parent.iter().zip(&left).map(|(p, l)| p - l).collect();
                let weighted =
                    (i as f64 * gini(&left, i) + (n - i) as f64 * gini(&right, n - i)) / n as f64;
                let gain = parent_gini - weighted;
                if best.as_ref().is_none_or(|s| gain > s.gain) {
                    best = Some(Split {
                        feature: f,
                        threshold: midpoint(a, b),
                        gain,
                    });
                }
            }
        }
        best
    }

    fn grow(&mut self, idx: Vec<usize>, depth: usize) -> usize {
        let counts = self.counts(&idx);
        let at = self.nodes.len();
        self.nodes.push(Node::Leaf {
            class: majority(&counts),
        });
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        let depth_left = self.params.max_depth.is_none_or(|m| depth < m);
        if pure || !depth_left {
            return at;
        }
        let Some(split) = self.best_split(&idx, &counts) else {
            return at;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = idx
            .iter()
            .partition(|&&i| self.rows[i][split.feature] <= split.threshold);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[at] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        at
    }
}

/// Grows a tree on labels in `0..classes`. Impure nodes are split on the
/// best Gini decrease even when that decrease is zero, so an unbounded tree
/// fits any data without conflicting duplicates. Ties keep the earliest
/// feature and the lowest threshold.
pub(crate) fn fit_tree(
    rows: &[&[f64]],
    labels: &[usize],
    classes: usize,
    params: &TreeParams,
) -> Result<DecisionTree> {
    params.validate()?;
    let mut b = Builder {
        rows,
        labels,
        classes,
        params: *params,
        nodes: Vec::new(),
    };
    b.grow((0..rows.len()).collect(), 0);
    Ok(DecisionTree { nodes: b.nodes })
}
