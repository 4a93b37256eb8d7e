//! Exclusive feature bundling and the binned training layout.
//!
//! Each bundle is one merged histogram column. In a bundle whose members all
//! have a zero ("default") bin, merged bin 0 means every member is at its
//! default, and member `f` maps its non-default bin `b` to
//! `offset_f + rank(b)`, where `rank` skips the default bin. A feature
//! without a default bin forms a dense singleton whose merged bin is its own
//! bin. Features with a default bin use the merged encoding even when they
//! are alone, so bundled and unbundled training share one arithmetic path.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::bins::BinMapper;

/// Largest merged column a bundle may grow to.
const MAX_BUNDLE_BINS: usize = u16::MAX as usize;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleMember {
    pub feature: usize,
    pub n_bins: u16,
    pub default_bin: Option<u16>,
    pub offset: u16,
}

impl BundleMember {
    /// Merged bin for this member's own bin `b`; `None` for the default bin.
    pub fn encode(&self, b: u16) -> Option<u16> {
        match self.default_bin {
            None => Some(b),
            Some(d) if b == d => None,
            Some(d) => Some(self.offset + if b < d { b } else { b - 1 }),
        }
    }

    /// This member's bin given the bundle's merged bin.
    pub fn decode(&self, merged: u16) -> u16 {
        match self.default_bin {
            None => merged,
            Some(d) => {
                let slots = self.n_bins - 1;
                if merged >= self.offset && merged < self.offset + slots {
                    let r = merged - self.offset;
                    if r < d {
                        r
                    } else {
                        r + 1
                    }
                } else {
                    d
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureBundle {
    pub members: Vec<BundleMember>,
    pub n_bins: u16,
}

impl FeatureBundle {
    fn dense(feature: usize, n_bins: u16) -> Self {
        Self {
            members: alloc::vec![BundleMember {
                feature,
                n_bins,
                default_bin: None,
                offset: 0,
            }],
            n_bins,
        }
    }

    fn sparse() -> Self {
        Self {
            members: Vec::new(),
            n_bins: 1,
        }
    }

    fn push_sparse(&mut self, feature: usize, n_bins: u16, default_bin: u16) {
        self.members.push(BundleMember {
            feature,
            n_bins,
            default_bin: Some(default_bin),
            offset: self.n_bins,
        });
        self.n_bins += n_bins - 1;
    }
}

/// Groups features so that no training row is non-default in two members of
/// the same bundle. Features are visited by decreasing non-default count
/// (ties by index) and join the first bundle they do not conflict with.
/// With `enabled = false` every feature is its own bundle.
pub fn efb_bundle(binned: &[Vec<u16>], mapper: &BinMapper, enabled: bool) -> Vec<FeatureBundle> {
    let p = binned.len();
    if p == 0 {
        return Vec::new();
    }
    let n = binned[0].len();
    let words = n.div_ceil(64);
    let nonzero_rows = |f: usize, d: u16| -> Vec<usize> {
        (0..n).filter(|&i| binned[f][i] != d).collect()
    };

    let mut order: Vec<(usize, usize)> = Vec::with_capacity(p);
    let mut sparse_rows: Vec<Vec<usize>> = alloc::vec![Vec::new(); p];
    let mut bundles: Vec<(FeatureBundle, Vec<u64>)> = Vec::new();
    for f in 0..p {
        let fb = &mapper.features[f];
        match fb.default_bin() {
            Some(d) => {
                sparse_rows[f] = nonzero_rows(f, d);
                order.push((f, sparse_rows[f].len()));
            }
            None => bundles.push((FeatureBundle::dense(f, fb.n_bins() as u16), Vec::new())),
        }
    }
    order.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));

    for (f, _) in order {
        let fb = &mapper.features[f];
        let nb = fb.n_bins();
        let d = fb.default_bin().unwrap_or(0);
        let rows = &sparse_rows[f];
        let slot = if enabled {
            bundles.iter().position(|(b, mask)| {
                !mask.is_empty()
                    && usize::from(b.n_bins) + nb - 1 <= MAX_BUNDLE_BINS
                    && rows.iter().all(|&i| mask[i / 64] & (1u64 << (i % 64)) == 0)
            })
        } else {
            None
        };
        let idx = match slot {
            Some(k) => k,
            None => {
                bundles.push((FeatureBundle::sparse(), alloc::vec![0u64; words.max(1)]));
                bundles.len() - 1
            }
        };
        let (bundle, mask) = &mut bundles[idx];
        bundle.push_sparse(f, nb as u16, d);
        for &i in rows {
            mask[i / 64] |= 1u64 << (i % 64);
        }
    }

    let mut out: Vec<FeatureBundle> = bundles.into_iter().map(|(b, _)| b).collect();
    out.sort_by_key(|b| b.members.iter().map(|m| m.feature).min());
    out
}

/// Where each original feature lives in the bundled layout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureSlot {
    pub bundle: usize,
    pub member: usize,
}

/// Training rows in bundled, column-major form.
#[derive(Debug, Clone)]
pub struct BinnedDataset {
    pub bundles: Vec<FeatureBundle>,
    /// Merged bin per bundle, per row.
    pub columns: Vec<Vec<u16>>,
    /// Start of each bundle inside a flat histogram.
    pub hist_offsets: Vec<usize>,
    pub hist_len: usize,
    pub slots: Vec<FeatureSlot>,
    pub n_rows: usize,
}

impl BinnedDataset {
    pub fn new(binned: &[Vec<u16>], bundles: Vec<FeatureBundle>) -> Self {
        let n_rows = binned.first().map_or(0, Vec::len);
        let mut slots = alloc::vec![FeatureSlot { bundle: 0, member: 0 }; binned.len()];
        let mut hist_offsets = Vec::with_capacity(bundles.len());
        let mut hist_len = 0;
        let mut columns = Vec::with_capacity(bundles.len());
        for (bi, bundle) in bundles.iter().enumerate() {
            hist_offsets.push(hist_len);
            hist_len += usize::from(bundle.n_bins);
            let mut col = alloc::vec![0u16; n_rows];
            for (mi, m) in bundle.members.iter().enumerate() {
                slots[m.feature] = FeatureSlot { bundle: bi, member: mi };
                for (i, &b) in binned[m.feature].iter().enumerate() {
                    if let Some(merged) = m.encode(b) {
                        col[i] = merged;
                    }
                }
            }
            columns.push(col);
        }
        Self {
            bundles,
            columns,
            hist_offsets,
            hist_len,
            slots,
            n_rows,
        }
    }

    pub fn n_features(&self) -> usize {
        self.slots.len()
    }

    pub fn member(&self, feature: usize) -> &BundleMember {
        let s = self.slots[feature];
        &self.bundles[s.bundle].members[s.member]
    }

    /// Original bin of `feature` for training row `row`.
    pub fn feature_bin(&self, feature: usize, row: usize) -> u16 {
        let s = self.slots[feature];
        self.bundles[s.bundle].members[s.member].decode(self.columns[s.bundle][row])
    }
}
