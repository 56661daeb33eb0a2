//! Numerical and statistical kernels used by the diagnostics: power-iteration
//! PCA, Pearson correlation with t-test p-values, two-cluster k-means, an
//! RBF-kernel SMO support vector machine, exact t-SNE and permutation tests.
//!
//! Everything here is deterministic given its inputs and seed. Parallel loops
//! only ever fill independent slots and any reductions across slots are done
//! sequentially in index order, so results do not depend on thread count.

mod kmeans;
mod pca;
mod pearson;
mod permutation;
mod special;
mod svm;
mod tsne;

pub use kmeans::{cluster_alignment_accuracy, kmeans2, ClusterLabels, KMeansConfig};
pub use pca::top_principal_component;
pub use pearson::{pearson, PearsonResult};
pub use permutation::{
    balanced_partition_test, binomial, monte_carlo_p_value, permutation_p_value, PartitionTest,
    PermutationMode, EXACT_PARTITION_LIMIT,
};
pub use special::{ln_gamma, regularized_incomplete_beta, student_t_two_sided};
pub use svm::{svm_predict, svm_rbf_train, SvmConfig, SvmModel};
pub use tsne::{tsne2d, TsneConfig, TsneOutput};

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
