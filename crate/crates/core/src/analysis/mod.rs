//! Critical brackets, exponent bounds and inequality checks on finite tables.

pub mod bracket;
pub mod checks;
pub mod identities;
pub mod series;

pub use bracket::{
    alpha_upper, beta_lower, bracket_scan, fekete_edge, scan_report, zc_bracket, zc_bracket_from,
    zc_bracket_tables, BracketFlag, BracketSeries, CriticalBracket, GrowthBound, LowerEvidence,
    ScanReport,
};
pub use checks::{
    bubble, bubble_domination, chito_z_bound, critical_growth_diagnostic, madras_slade_check,
    quant_constants, quant_constants_report, two_point_decay_check, BubbleCheck, ChiToZBound,
    DecayReport, MadrasSladeCheck, QuantReport, RhsSource,
};
pub use identities::{
    check_bridge_reversal, check_differential, check_half_space_submultiplicative, check_mtp,
    check_slab_supermultiplicative, check_submultiplicative, verify_identities, ExactCheck,
    IdentityReport, InequalityCheck,
};
pub use series::LnSeries;
