// Negated float comparisons are deliberate: they route NaN to the failure branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod function;
pub mod integrate;
pub mod partition;
pub mod scale;
pub mod spaces;

pub use error::{Error, Result};
pub use function::ScaleFunction;
pub use integrate::{
    delta_integral, improper_integral, riemann_sum, single_step_integral, DeltaIntegrator,
    IntegralResult, Quadrature, Tag, Targets, TruncationPolicy,
};
pub use partition::{make_delta_partition, refine, verify_delta_property, Partition};
pub use scale::{Block, Enumeration, PointClass, PointGenerator, Segment, Side, Tail, TimeScale};
pub use spaces::{
    limit_at_infinity, membership_report, sup_norm, LimitConfig, LimitDiagnosis, LimitStatus,
    MembershipConfig, MembershipReport, Sampler, Verdict,
};
pub mod kernel;
pub use kernel::{
    operator_norm_lower_bound, regularity_report, ConditionResult, Conditions, Kernel, RegularityConfig,
    RegularityReport, RegularityVerdict,
};
pub mod expr;
pub use expr::{parse as parse_expr, Bindings, EvalError, Expr, ParseError};
pub mod dual;
pub use dual::{
    apply_functional, basis_element, functional_norm, norm_witness, schauder_expand, to_ell1,
    unit_element, DualRep, IsolatedScale,
};
pub mod operator;
pub use operator::{builtin_operator, extract_kernel, verify_reconstruction, LinearOperator};
pub mod cli;
