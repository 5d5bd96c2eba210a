//! Shared learners for the early-classification algorithms: a probabilistic
//! classifier contract, multinomial logistic regression, Gaussian naive
//! Bayes, a symbolic word classifier, seeded K-Means, 1-NN, and a one-class
//! acceptance boundary.

mod error;
mod gnb;
mod kmeans;
mod logreg;
mod nn;
mod oneclass;
mod prob;
mod quantile;
mod words;

pub use error::LearnError;
pub use gnb::{fit_gnb, GaussianNb};
pub use kmeans::{kmeans, KMeansModel};
pub use logreg::{fit_logreg, LogRegConfig, LogRegProblem, LogisticRegression};
pub use nn::nn1;
pub use oneclass::{fit_one_class, OneClassBoundary};
pub use prob::{argmax, ProbClassifier};
pub use quantile::standard_normal_quantile;
pub use words::{fit_word_classifier, WordConfig, WordModel};
