use alloc::boxed::Box;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::bins::BinMapper;
use super::bundle::BinnedDataset;
use super::goss::GossSample;
use super::params::GbdtParams;
use super::split::{build_histogram, find_best_split, subtract_histogram, HistBin, SplitChoice};
use crate::error::Error;

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Leaf {
        value: f64,
    },
    /// Rows with `x[feature] <= threshold` (equivalently bin `<= bin`) go left.
    Split {
        feature: usize,
        bundle: usize,
        bin: u16,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// Node arena with the root at index 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "NestedNode", try_from = "NestedNode")]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn leaf(value: f64) -> Self {
        Self {
            nodes: alloc::vec![Node::Leaf { value }],
        }
    }

    pub fn predict_row(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => i = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    /// Original feature ids of the internal nodes, in arena order.
    pub fn split_features(&self) -> impl Iterator<Item = usize> + '_ {
        self.nodes.iter().filter_map(|n| match n {
            Node::Split { feature, .. } => Some(*feature),
            Node::Leaf { .. } => None,
        })
    }

    /// The root split as `(feature, bin)`, if the tree has one.
    pub fn root_split(&self) -> Option<(usize, u16)> {
        match self.nodes.first()? {
            Node::Split { feature, bin, .. } => Some((*feature, *bin)),
            Node::Leaf { .. } => None,
        }
    }
}

/// On-disk shape of a tree: nodes nest instead of pointing into an arena.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NestedNode {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        bundle: usize,
        bin: u16,
        threshold: f64,
        left: Box<NestedNode>,
        right: Box<NestedNode>,
    },
}

impl From<Tree> for NestedNode {
    fn from(tree: Tree) -> Self {
        fn nest(nodes: &[Node], i: usize) -> NestedNode {
            match nodes[i] {
                Node::Leaf { value } => NestedNode::Leaf { value },
                Node::Split {
                    feature,
                    bundle,
                    bin,
                    threshold,
                    left,
                    right,
                } => NestedNode::Split {
                    feature,
                    bundle,
                    bin,
                    threshold,
                    left: Box::new(nest(nodes, left)),
                    right: Box::new(nest(nodes, right)),
                },
            }
        }
        if tree.nodes.is_empty() {
            return NestedNode::Leaf { value: 0.0 };
        }
        nest(&tree.nodes, 0)
    }
}

impl TryFrom<NestedNode> for Tree {
    type Error = Error;

    fn try_from(root: NestedNode) -> Result<Self, Error> {
        fn flatten(node: NestedNode, nodes: &mut Vec<Node>) -> Result<usize, Error> {
            let at = nodes.len();
            match node {
                NestedNode::Leaf { value } => {
                    if !value.is_finite() {
                        return Err(Error::Config("non-finite leaf value".into()));
                    }
                    nodes.push(Node::Leaf { value });
                }
                NestedNode::Split {
                    feature,
                    bundle,
                    bin,
                    threshold,
                    left,
                    right,
                } => {
                    nodes.push(Node::Leaf { value: 0.0 });
                    let l = flatten(*left, nodes)?;
                    let r = flatten(*right, nodes)?;
                    nodes[at] = Node::Split {
                        feature,
                        bundle,
                        bin,
                        threshold,
                        left: l,
                        right: r,
                    };
                }
            }
            Ok(at)
        }
        let mut nodes = Vec::new();
        flatten(root, &mut nodes)?;
        Ok(Self { nodes })
    }
}

/// A grown tree plus its output for every training row.
#[derive(Debug, Clone)]
pub struct GrownTree {
    pub tree: Tree,
    pub row_output: Vec<f64>,
}

struct OpenLeaf {
    node: usize,
    /// Sampled rows, ascending; they drive histograms and split search.
    sampled: Vec<u32>,
    /// Every training row reaching the leaf; they set the leaf value.
    all: Vec<u32>,
    grad: f64,
    hist: Vec<HistBin>,
    split: Option<SplitChoice>,
}

/// Grows one tree leaf-wise: the open leaf whose best split most improves
/// the projected variance is split next, until `max_leaves` is reached or
/// no leaf has a legal improving split.
///
/// `gradients` are the per-row first derivatives of the loss, `p - y`; the
/// leaf value steps against them.
pub fn grow_tree(
    data: &BinnedDataset,
    mapper: &BinMapper,
    gradients: &[f64],
    sample: &GossSample,
    params: &GbdtParams,
) -> GrownTree {
    let n_rows = data.n_rows;
    let mut weighted = alloc::vec![0.0; n_rows];
    let mut sampled = Vec::with_capacity(sample.a.len() + sample.b.len());
    for (r, w) in sample.weighted_rows() {
        weighted[r] = gradients[r] * w;
        sampled.push(r as u32);
    }
    let n_sampled = sampled.len();
    let min_data = params.min_data_in_leaf.max(1);

    let root_grad: f64 = sampled.iter().map(|&r| weighted[r as usize]).sum();
    let root_hist = build_histogram(data, &sampled, &weighted);
    let mut nodes = alloc::vec![Node::Leaf { value: 0.0 }];
    let root_split = find_best_split(data, &root_hist, root_grad, n_sampled, n_sampled, min_data);
    let mut open = alloc::vec![OpenLeaf {
        node: 0,
        sampled,
        all: (0..n_rows as u32).collect(),
        grad: root_grad,
        hist: root_hist,
        split: root_split,
    }];
    let mut closed: Vec<OpenLeaf> = Vec::new();

    while open.len() + closed.len() < params.max_leaves {
        let mut best: Option<usize> = None;
        for (i, leaf) in open.iter().enumerate() {
            let Some(s) = leaf.split else { continue };
            if s.improvement <= 0.0 {
                continue;
            }
            if best.map_or(true, |b| s.improvement > open[b].split.unwrap().improvement) {
                best = Some(i);
            }
        }
        let Some(bi) = best else { break };
        let leaf = open.remove(bi);
        let s = leaf.split.unwrap();
        let goes_left = |r: &u32| data.feature_bin(s.feature, *r as usize) <= s.bin;
        let (ls, rs): (Vec<u32>, Vec<u32>) = leaf.sampled.iter().copied().partition(goes_left);
        let (la, ra): (Vec<u32>, Vec<u32>) = leaf.all.iter().copied().partition(goes_left);
        let (lh, rh) = if ls.len() <= rs.len() {
            let small = build_histogram(data, &ls, &weighted);
            let large = subtract_histogram(&leaf.hist, &small);
            (small, large)
        } else {
            let small = build_histogram(data, &rs, &weighted);
            let large = subtract_histogram(&leaf.hist, &small);
            (large, small)
        };
        let l_node = nodes.len();
        let r_node = l_node + 1;
        nodes.push(Node::Leaf { value: 0.0 });
        nodes.push(Node::Leaf { value: 0.0 });
        let slot = data.slots[s.feature];
        nodes[leaf.node] = Node::Split {
            feature: s.feature,
            bundle: slot.bundle,
            bin: s.bin,
            threshold: mapper.features[s.feature].threshold(s.bin),
            left: l_node,
            right: r_node,
        };
        let lg = s.left_grad;
        let rg = leaf.grad - lg;
        for (node, rows, all, grad, hist) in [(l_node, ls, la, lg, lh), (r_node, rs, ra, rg, rh)] {
            let split = find_best_split(data, &hist, grad, rows.len(), n_sampled, min_data);
            open.push(OpenLeaf {
                node,
                sampled: rows,
                all,
                grad,
                hist,
                split,
            });
        }
        // Leaves that cannot split release their histograms early.
        let (keep, done): (Vec<OpenLeaf>, Vec<OpenLeaf>) =
            open.into_iter().partition(|l| l.split.is_some_and(|s| s.improvement > 0.0));
        open = keep;
        closed.extend(done.into_iter().map(|mut l| {
            l.hist = Vec::new();
            l
        }));
    }

    let mut row_output = alloc::vec![0.0; n_rows];
    for leaf in open.iter().chain(closed.iter()) {
        let g: f64 = leaf.all.iter().map(|&r| gradients[r as usize]).sum();
        let value = -params.learning_rate * g / (leaf.all.len() as f64 + params.leaf_regularizer);
        // A leaf no row reaches (possible only with a zero regularizer and
        // an empty side, which min_data forbids) still gets a finite value.
        let value = if value.is_finite() { value } else { 0.0 };
        nodes[leaf.node] = Node::Leaf { value };
        for &r in &leaf.all {
            row_output[r as usize] = value;
        }
    }
    GrownTree {
        tree: Tree { nodes },
        row_output,
    }
}
