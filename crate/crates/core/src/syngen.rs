//! Seeded synthetic corpus generator.
//!
//! Produces corpora with the ordinal features the analyses care about
//! (skewed citation counts, researcher-level latent productivity, field-size
//! heterogeneity, a tunable year-to-year noise component) without any
//! claim of demographic realism. Generation is a pure function of the config:
//! a fixed seed yields a bit-identical corpus.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Gamma, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::corpus::{
    AuthorshipEntry, CategoryId, Corpus, FieldTaxonomy, InstitutionId, PubId, Publication, Researcher,
    ResearcherId, SdsId, SdsInfo, UdaId, Year,
};
use crate::error::GeneratorError;
use crate::windows::Window;

/// Knobs of the generator. All rates are per researcher-year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub n_sds: usize,
    pub n_udas: usize,
    pub n_universities: usize,
    /// Inclusive range the per-sector staff count is drawn from.
    pub staff_per_sds: (usize, usize),
    pub years: Window,
    /// Log-sigma of the per-researcher latent rate multiplier (lognormal with
    /// unit mean). 0 makes every researcher equally productive on average.
    pub latent_log_sigma: f64,
    /// Base publication rate; a researcher's yearly rate is
    /// `pubs_per_year * latent * yearly_noise`.
    pub pubs_per_year: f64,
    /// Mean of the citation count distribution.
    pub citation_mean: f64,
    /// Overdispersion of citations: variance is `mean + phi * mean^2`
    /// (gamma-mixed Poisson). 0 collapses to a constant `round(mean)`.
    pub citation_dispersion: f64,
    /// Mean number of co-authors beyond the lead (Poisson). 0 means solo
    /// publications only.
    pub coauthors_mean: f64,
    /// Probability that a co-author slot is filled by a same-sector roster
    /// colleague rather than an off-roster author.
    pub roster_coauthor_share: f64,
    /// Fraction of sectors flagged for positional authorship weighting.
    pub positional_sds_fraction: f64,
    /// Probability that a publication carries a second subject category.
    pub multi_category_share: f64,
    /// Fraction of researchers whose activity interval is trimmed so they do
    /// not span the full year range.
    pub partial_career_fraction: f64,
    /// Year-to-year noise: log-sigma of the yearly rate multiplier. 0 removes
    /// publication-count randomness entirely (counts become `round(rate)`).
    pub noise: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            seed: 42,
            n_sds: 5,
            n_udas: 3,
            n_universities: 25,
            staff_per_sds: (40, 60),
            years: Window::new(2003, 2008).expect("valid default window"),
            latent_log_sigma: 0.8,
            pubs_per_year: 1.2,
            citation_mean: 4.0,
            citation_dispersion: 0.8,
            coauthors_mean: 2.0,
            roster_coauthor_share: 0.4,
            positional_sds_fraction: 0.3,
            multi_category_share: 0.15,
            partial_career_fraction: 0.0,
            noise: 0.6,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<(), GeneratorError> {
        let bad = |msg: &str| Err(GeneratorError::InvalidConfig(msg.to_owned()));
        if self.n_sds == 0 || self.n_udas == 0 || self.n_universities == 0 {
            return bad("n_sds, n_udas and n_universities must be positive");
        }
        if self.staff_per_sds.0 == 0 || self.staff_per_sds.0 > self.staff_per_sds.1 {
            return bad("staff_per_sds must be a non-empty positive range");
        }
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.pubs_per_year) || !positive(self.citation_mean) {
            return bad("pubs_per_year and citation_mean must be positive");
        }
        if self.citation_dispersion < 0.0 || self.coauthors_mean < 0.0 {
            return bad("citation_dispersion and coauthors_mean must be non-negative");
        }
        for (name, share) in [
            ("roster_coauthor_share", self.roster_coauthor_share),
            ("positional_sds_fraction", self.positional_sds_fraction),
            ("multi_category_share", self.multi_category_share),
            ("partial_career_fraction", self.partial_career_fraction),
        ] {
            if !(0.0..=1.0).contains(&share) {
                return Err(GeneratorError::InvalidConfig(format!("{name} must lie in [0, 1]")));
            }
        }
        if self.latent_log_sigma < 0.0 || self.noise < 0.0 {
            return bad("latent_log_sigma and noise must be non-negative");
        }
        Ok(())
    }
}

/// A generated corpus plus the hidden per-researcher truth used by oracle
/// checks.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedCorpus {
    pub corpus: Corpus,
    /// (researcher, latent rate multiplier), in researcher id order.
    pub latent_rates: Vec<(ResearcherId, f64)>,
}

/// Unit-mean lognormal draw with the given log-sigma; exactly 1 at sigma 0.
fn lognormal_unit_mean(rng: &mut ChaCha12Rng, sigma: f64) -> f64 {
    if sigma == 0.0 {
        return 1.0;
    }
    let normal = Normal::new(-0.5 * sigma * sigma, sigma).expect("valid lognormal parameters");
    normal.sample(rng).exp()
}

fn sample_poisson(rng: &mut ChaCha12Rng, rate: f64) -> u64 {
    if rate <= 0.0 {
        return 0;
    }
    let poisson = Poisson::new(rate).expect("positive finite rate");
    poisson.sample(rng) as u64
}

/// Overdispersed citation count: gamma-mixed Poisson with mean `mean` and
/// variance `mean + phi * mean^2`; a point mass at `round(mean)` when phi = 0.
fn sample_citations(rng: &mut ChaCha12Rng, mean: f64, phi: f64) -> u32 {
    if phi == 0.0 {
        return mean.round() as u32;
    }
    let shape = 1.0 / phi;
    let scale = phi * mean;
    let gamma = Gamma::new(shape, scale).expect("valid gamma parameters");
    let rate = gamma.sample(rng);
    sample_poisson(rng, rate) as u32
}

/// Generate a corpus. Deterministic in the config; the returned corpus passes
/// every corpus invariant.
pub fn generate(config: &GeneratorConfig) -> Result<GeneratedCorpus, GeneratorError> {
    config.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);

    // Taxonomy: sector i maps to area i mod n_udas; the first
    // round(fraction * n_sds) sectors use positional weighting.
    let n_positional = (config.positional_sds_fraction * config.n_sds as f64).round() as usize;
    let mut taxonomy_entries = std::collections::BTreeMap::new();
    let sds_ids: Vec<SdsId> = (1..=config.n_sds).map(|i| SdsId::new(format!("SDS-{i:03}"))).collect();
    let categories: Vec<CategoryId> =
        (1..=config.n_sds).map(|i| CategoryId::new(format!("CAT-{i:03}"))).collect();
    for (i, sds) in sds_ids.iter().enumerate() {
        taxonomy_entries.insert(
            sds.clone(),
            SdsInfo {
                uda_id: UdaId::new(format!("UDA-{:02}", (i % config.n_udas) + 1)),
                positional_weighting: i < n_positional,
            },
        );
    }
    let taxonomy = FieldTaxonomy::new(taxonomy_entries);
    let universities: Vec<InstitutionId> =
        (1..=config.n_universities).map(|i| InstitutionId::new(format!("U-{i:03}"))).collect();

    // Researchers with latent rates and (possibly trimmed) activity spans.
    let full = config.years;
    let mut researchers = Vec::new();
    let mut latent_rates = Vec::new();
    let mut staff_of_sds: Vec<Vec<usize>> = vec![Vec::new(); config.n_sds];
    for (sds_idx, sds) in sds_ids.iter().enumerate() {
        let staff = rng.random_range(config.staff_per_sds.0..=config.staff_per_sds.1);
        for member in 1..=staff {
            let id = ResearcherId::new(format!("R-{:03}-{member:03}", sds_idx + 1));
            let university = universities[rng.random_range(0..universities.len())].clone();
            let (mut active_from, mut active_to) = (full.start(), full.end());
            if full.length() > 1 && rng.random_bool(config.partial_career_fraction) {
                let trim = rng.random_range(1..full.length()) as Year;
                if rng.random_bool(0.5) {
                    active_from += trim;
                } else {
                    active_to -= trim;
                }
            }
            staff_of_sds[sds_idx].push(researchers.len());
            latent_rates.push((id.clone(), lognormal_unit_mean(&mut rng, config.latent_log_sigma)));
            researchers.push(Researcher {
                researcher_id: id,
                sds_id: sds.clone(),
                university_id: university,
                active_from,
                active_to,
            });
        }
    }

    // Publications, led by one roster researcher per paper.
    let mut publications = Vec::new();
    let mut authorship = Vec::new();
    let mut pub_counter = 0u64;
    for (sds_idx, members) in staff_of_sds.iter().enumerate() {
        for &r_idx in members {
            let researcher = &researchers[r_idx];
            let latent = latent_rates[r_idx].1;
            for year in full.years() {
                if year < researcher.active_from || year > researcher.active_to {
                    continue;
                }
                let rate = config.pubs_per_year * latent;
                let count = if config.noise == 0.0 {
                    rate.round() as u64
                } else {
                    let yearly = rate * lognormal_unit_mean(&mut rng, config.noise);
                    sample_poisson(&mut rng, yearly)
                };
                for _ in 0..count {
                    pub_counter += 1;
                    let pub_id = PubId::new(format!("P{pub_counter:07}"));

                    let mut subject_categories = vec![categories[sds_idx].clone()];
                    if config.n_sds > 1 && rng.random_bool(config.multi_category_share) {
                        let mut extra = rng.random_range(0..config.n_sds - 1);
                        if extra >= sds_idx {
                            extra += 1;
                        }
                        subject_categories.push(categories[extra].clone());
                    }

                    publications.push(Publication {
                        pub_id: pub_id.clone(),
                        year,
                        citation_count: sample_citations(
                            &mut rng,
                            config.citation_mean,
                            config.citation_dispersion,
                        ),
                        subject_categories,
                    });

                    // Byline: the lead plus sampled co-authors, shuffled.
                    let extra_authors = if config.coauthors_mean == 0.0 {
                        0
                    } else {
                        sample_poisson(&mut rng, config.coauthors_mean).min(20) as usize
                    };
                    let mut slots: Vec<(Option<usize>, InstitutionId)> =
                        vec![(Some(r_idx), researcher.university_id.clone())];
                    for _ in 0..extra_authors {
                        let roster = members.len() > 1 && rng.random_bool(config.roster_coauthor_share);
                        if roster {
                            let mut pick = members[rng.random_range(0..members.len())];
                            if slots.iter().any(|(r, _)| *r == Some(pick)) {
                                pick = members[rng.random_range(0..members.len())];
                            }
                            if slots.iter().all(|(r, _)| *r != Some(pick)) {
                                slots.push((Some(pick), researchers[pick].university_id.clone()));
                                continue;
                            }
                        }
                        let inst = universities[rng.random_range(0..universities.len())].clone();
                        slots.push((None, inst));
                    }
                    slots.shuffle(&mut rng);
                    for (position, (roster_idx, institution)) in slots.into_iter().enumerate() {
                        authorship.push(AuthorshipEntry {
                            pub_id: pub_id.clone(),
                            position: position as u32 + 1,
                            researcher_id: roster_idx.map(|i| researchers[i].researcher_id.clone()),
                            institution_id: institution,
                        });
                    }
                }
            }
        }
    }

    let label = format!("synthetic snapshot (seed {})", config.seed);
    let corpus = Corpus::new(researchers, publications, authorship, taxonomy, label)
        .expect("generated corpus satisfies all invariants");
    latent_rates.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(GeneratedCorpus { corpus, latent_rates })
}
