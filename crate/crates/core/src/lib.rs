//! Human genetic linkage analysis: exact pedigree likelihoods by peeling,
//! lod scores, efficient scores, sequential and FDR-based detection
//! criteria, heterogeneity tests, gene-counting EM, expected lods and
//! family-based tests.

pub mod corpus;
pub mod detect;
pub mod familytests;
pub mod genecount;
pub mod io;
pub mod likelihood;
pub mod model;
pub mod numeric;
pub mod pedigree;
pub mod sim;

pub use likelihood::{Family, LikelihoodEngine, Observation, ObservedData};
pub use model::{Haplotype, Locus, PenetranceModel, PhasedGenotype, Phenotype, TwoLocusModel};
pub use pedigree::{validate_pedigree, Individual, Pedigree, Sex};
