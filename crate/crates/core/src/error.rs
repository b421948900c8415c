use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Library errors. Display strings start with a module-qualified code so CLI
/// consumers can match on them.
#[derive(Error, Debug)]
pub enum Error {
    // curve
    #[error("curve::duplicate_branch_point: E_{0} == E_{1}")]
    DuplicateBranchPoint(usize, usize),
    #[error("curve::zero_branch_point: E_{0} == 0")]
    ZeroBranchPoint(usize),
    #[error("curve::odd_count: need an even number (>= 2) of branch points, got {0}")]
    OddCount(usize),
    #[error("curve::at_branch_point: z coincides with branch point E_{0}")]
    AtBranchPoint(usize),

    // contour
    #[error("contour::intersecting_cuts: cuts {0} and {1} intersect or come too close")]
    IntersectingCuts(usize, usize),
    #[error("contour::too_close_to_branch_point: path within {dist:.3e} of E_{index} (min {min:.3e})")]
    TooCloseToBranchPoint { index: usize, dist: f64, min: f64 },
    #[error("contour::pole_on_path: integrand denominator {0:.3e} at z = {1}")]
    PoleOnPath(f64, crate::C64),
    #[error("contour::tolerance_not_reached: error estimate {got:.3e} > requested {want:.3e}")]
    ToleranceNotReached { got: f64, want: f64 },
    #[error("contour::routing_failed: no clear path from {0} to {1}")]
    RoutingFailed(crate::C64, crate::C64),
    #[error("contour::homology_invalid: {0}")]
    HomologyInvalid(String),

    // periods / theta
    #[error("periods::singular_c: a-period matrix of the differential basis is singular")]
    SingularC,
    #[error("theta::nonconvergent_tau: {0}")]
    NonconvergentTau(String),

    // abelian
    #[error("abelian::singular_normalization_system: third-kind a-period system is singular")]
    SingularNormalizationSystem,
    #[error("abelian::extrapolation_divergence: {0}")]
    ExtrapolationDivergence(String),
    #[error("abelian::genus_zero_unsupported: operation requires genus >= 1")]
    GenusZeroUnsupported,

    // hierarchy
    #[error("hierarchy::window_too_small: need margin {need} beyond [{lo}, {hi}]")]
    WindowTooSmall { lo: i64, hi: i64, need: i64 },
    #[error("hierarchy::degenerate_leading_coefficient: {0} at n = {1}")]
    DegenerateLeadingCoefficient(String, i64),
    #[error("hierarchy::root_at_branch_point_collision: multiplicity >= 2 at branch point E_{0}")]
    RootAtBranchPointCollision(usize),
    #[error("hierarchy::sheet_ambiguous: lifted point at z = {0} matches neither sheet within 1e-6")]
    SheetAmbiguous(crate::C64),

    // solution
    #[error("solution::special_divisor: contains involution pair or doubled branch point at z = {0}")]
    SpecialDivisor(crate::C64),
    #[error("solution::self_check_failed: {0}")]
    SelfCheckFailed(String),
    #[error("solution::zero_alpha0: alpha(n_0) must be nonzero")]
    ZeroAlpha0,
    #[error("solution::equal_branch_points: E_0 == E_1 (alpha*beta in {{0, 1}})")]
    EqualBranchPoints,
    #[error("solution::pole_of_phi: P lies in the pole divisor of phi")]
    PoleOfPhi,
    #[error("solution::theta_near_zero: |theta| = {0:.3e} below {1:.3e} of typical scale")]
    ThetaNearZero(f64, f64),

    // verify
    #[error("verify::ill_conditioned_interpolation: singular value ratio {0:.3e}")]
    IllConditionedInterpolation(f64),

    // cli
    #[error("cli::config: {0}")]
    Config(String),
    #[error("cli::io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code classification: 2 input/guard, 3 internal self-check.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::SelfCheckFailed(_) => 3,
            _ => 2,
        }
    }
}
