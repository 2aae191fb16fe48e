//! Central tolerance / limit record. Every numeric threshold used by the
//! library lives here so reports can echo it verbatim.

#[derive(Clone, Debug, PartialEq)]
pub struct Tolerances {
    /// |det - 1| allowed for a Möbius matrix.
    pub determinant: f64,
    /// A map is hyperbolic iff |trace| > 2 + this.
    pub hyperbolic_trace: f64,
    /// Boundary points closer than this (in disc angle) are the same point.
    pub endpoint: f64,
    /// Lifts whose endpoints agree within this (disc angle) are one line.
    /// Looser than `endpoint`: long conjugators amplify rounding.
    pub pattern_dedupe: f64,
    /// A point closer than this to a geodesic lies on it.
    pub on_geodesic: f64,
    /// Minimum crossing angle inside the window (radians).
    pub tangency_angle: f64,
    /// Largest accepted defect of the surface relator.
    pub relator_defect: f64,
    /// Merge radius for concurrent crossing points (Euclidean, half-plane coords).
    pub vertex_merge: f64,
    /// Safety margin subtracted from the window radius in the filling test.
    pub filling_margin: f64,
    /// Number of boundary samples used by the visual-metric chain infimum.
    pub chain_samples: usize,
    /// Hyperbolicity constant fed to the visual-metric admissibility test.
    pub visual_delta: f64,
    /// Strand shortening stops once a sweep changes length by less than this.
    pub shortening: f64,
    /// Hard cap on shortening sweeps.
    pub max_shortening_iterations: usize,
    /// Points on a strand coincide within this.
    pub strand_point: f64,
    /// Relative tolerance deciding tau_core == tau_sigma (Euclidean strip).
    pub euclidean_strip: f64,
    /// Relative tolerance for clutching-ratio agreement.
    pub ratio_match: f64,
    /// Vertex cap for flip BFS.
    pub vertex_cap: usize,
    /// Vertex cap for brute-force automorphism search.
    pub automorphism_cap: usize,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        determinant: 1e-12,
        hyperbolic_trace: 1e-9,
        endpoint: 1e-9,
        pattern_dedupe: 1e-7,
        on_geodesic: 1e-9,
        tangency_angle: 1e-6,
        relator_defect: 1e-8,
        vertex_merge: 1e-9,
        filling_margin: 1.0,
        chain_samples: 4096,
        visual_delta: 1.1,
        shortening: 1e-9,
        max_shortening_iterations: 100_000,
        strand_point: 1e-9,
        euclidean_strip: 1e-12,
        ratio_match: 1e-9,
        vertex_cap: 1_000_000,
        automorphism_cap: 5000,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}
