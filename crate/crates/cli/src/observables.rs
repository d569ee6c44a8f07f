//! Text form of product observables: space-separated `P<site>` factors with
//! `P ∈ {I, X, Y, Z}` and 0-based sites, e.g. `"Z3 X4"`. `"P*"` stands for
//! the `N` single-site observables `P0 ... P<N-1>`.

use adiabat_core::linalg;
use adiabat_core::mps::ObservableProduct;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ObservableError {
    #[error("bad factor {0:?}: expected a Pauli letter and a site, like Z3")]
    BadFactor(String),
    #[error("site {site} out of range for {n_sites} sites in {text:?}")]
    SiteOutOfRange {
        text: String,
        site: usize,
        n_sites: usize,
    },
    #[error("site {0} appears twice")]
    Repeated(usize),
    #[error("empty observable")]
    Empty,
}

/// Expands one entry to `(label, observable)` pairs.
pub fn parse_observable(
    text: &str,
    n_sites: usize,
) -> Result<Vec<(String, ObservableProduct)>, ObservableError> {
    let text = text.trim();
    if text.is_empty() {
        return Err(ObservableError::Empty);
    }
    if let Some(letter) = text.strip_suffix('*') {
        let mut chars = letter.chars();
        let (Some(ch), None) = (chars.next(), chars.next()) else {
            return Err(ObservableError::BadFactor(text.into()));
        };
        let op = linalg::pauli(ch).ok_or_else(|| ObservableError::BadFactor(text.into()))?;
        return Ok((0..n_sites)
            .map(|i| {
                let obs = ObservableProduct::identity(n_sites, 2)
                    .with_site(i, op.clone())
                    .expect("site in range");
                (format!("{ch}{i}"), obs)
            })
            .collect());
    }
    let mut obs = ObservableProduct::identity(n_sites, 2);
    let mut seen = Vec::new();
    for factor in text.split_whitespace() {
        let mut chars = factor.chars();
        let ch = chars
            .next()
            .ok_or_else(|| ObservableError::BadFactor(factor.into()))?;
        let op = linalg::pauli(ch).ok_or_else(|| ObservableError::BadFactor(factor.into()))?;
        let site: usize = chars
            .as_str()
            .parse()
            .map_err(|_| ObservableError::BadFactor(factor.into()))?;
        if site >= n_sites {
            return Err(ObservableError::SiteOutOfRange {
                text: text.into(),
                site,
                n_sites,
            });
        }
        if seen.contains(&site) {
            return Err(ObservableError::Repeated(site));
        }
        seen.push(site);
        obs = obs.with_site(site, op).expect("site in range");
    }
    Ok(vec![(
        text.split_whitespace().collect::<Vec<_>>().join(" "),
        obs,
    )])
}

/// Expands every configured entry, in order.
pub fn parse_all(
    entries: &[String],
    n_sites: usize,
) -> Result<Vec<(String, ObservableProduct)>, ObservableError> {
    let mut out = Vec::new();
    for e in entries {
        out.extend(parse_observable(e, n_sites)?);
    }
    Ok(out)
}
