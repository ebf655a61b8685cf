use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("infinite valuation")]
    InfiniteValuation,
    #[error("no character defined for D = {0}")]
    NoCharacter(i64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("enumeration budget exceeded: {0}")]
    Budget(String),
    #[error("gamma pole at {0}")]
    GammaPole(f64),
    #[error("zeta pole")]
    ZetaPole,
    #[error("local pole: denominator vanishes near s = {re}{im:+}i")]
    LocalPole { re: f64, im: f64 },
    #[error("pole at s = {re}{im:+}i (residue estimate {residue_re}{residue_im:+}i)")]
    Pole {
        re: f64,
        im: f64,
        residue_re: f64,
        residue_im: f64,
    },
    #[error("divergent direct sum: Re(s) = {0} too small")]
    Divergent(f64),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
