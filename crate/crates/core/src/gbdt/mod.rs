//! Histogram gradient-boosted trees for binary targets.
//!
//! Features are cut into uniform-width bins, mutually exclusive sparse
//! features share one histogram column, each tree after the warm-up is fit
//! on a gradient-based one-side sample, and trees grow leaf-wise on the
//! projected variance gain.

mod bins;
mod bundle;
mod goss;
mod model;
mod params;
mod split;
mod tree;

pub use bins::{BinMapper, FeatureBins};
pub use bundle::{efb_bundle, BinnedDataset, BundleMember, FeatureBundle, FeatureSlot};
pub use goss::{goss_sample, GossSample};
pub use model::{mean_logistic_loss, sigmoid, train_gbdt, train_gbdt_traced, GbdtModel, MODEL_VERSION};
pub use params::GbdtParams;
pub use split::{
    build_histogram, find_best_split, subtract_histogram, variance_gain, HistBin, SideSums, SplitChoice,
};
pub use tree::{grow_tree, GrownTree, NestedNode, Node, Tree};
