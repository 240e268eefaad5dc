//! Singular values, wedge powers, Grassmannians and inner products.

mod cartan;
mod cyclotomic;
mod inner;
mod spectral;
mod subspace;
mod wedge;

pub use cartan::CartanStack;
pub use cyclotomic::{char_poly_exact, cyclotomic_certificate, CyclotomicCertificate};
pub use inner::{
    inner_product_distance, interpolate_inner_products, simultaneous_orthogonal_basis, InnerProduct,
    PENCIL_CONDITION_LIMIT,
};
pub use spectral::{
    lambda_gap, mu_gap, sorted_svd, spectral, symmetric_space_distance, SortedSvd, SpectralData,
};
pub use subspace::{grassmannian_distance, principal_angle_distance, u_subspace, Subspace, U_GAP_TOL};
pub use wedge::{k_subsets, wedge_power, wedge_power_exact, wedge_power_rect};
