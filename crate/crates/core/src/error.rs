use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid beam geometry: {0}")]
    InvalidBeam(String),

    #[error("duplicate mode index (ell={ell}, p={p}) in superposition")]
    DuplicateMode { ell: i32, p: u32 },

    #[error("superposition norm {norm} deviates from 1 by more than {tolerance}")]
    NotNormalized { norm: f64, tolerance: f64 },

    #[error("superpositions are expressed in different beam geometries")]
    BeamMismatch,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("sampled fields do not share grid and plane")]
    GridMismatch,

    #[error("invalid volume: {0}")]
    InvalidVolume(String),

    #[error(
        "voxel ({ix}, {iy}, {iz}) has {charged_faces} charged faces; increase the sampling resolution"
    )]
    Refinement {
        ix: usize,
        iy: usize,
        iz: usize,
        charged_faces: usize,
    },

    #[error("linking number requires closed loops")]
    OpenLine,

    #[error("Gauss sum {raw} is not within 0.1 of an integer; refine the sampling")]
    LinkingAccuracy { raw: f64 },

    #[error("grating with {cycles} cycles cannot isolate the first diffraction order")]
    GratingTooCoarse { cycles: f64 },

    #[error("probe waist {probe} is smaller than twice the target waist {target}")]
    ProbeTooSmall { probe: f64, target: f64 },

    #[error("invalid rate or duration: {0}")]
    InvalidRate(String),

    #[error("degenerate analyzer settings: {0}")]
    DegenerateSettings(String),

    #[error("invalid two-photon state: {0}")]
    InvalidState(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
