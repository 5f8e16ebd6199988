//! Data model: researchers, publications, bylines, the field taxonomy, and
//! the staff/field eligibility filters applied before any ranking.
//!
//! A [`Corpus`] is immutable after construction. `Corpus::new` canonicalizes
//! row order, verifies every cross-reference and invariant, and builds the
//! lookup index used by the scoring code; all downstream operations are pure
//! reads and safe to share across threads.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{DataError, Issue, IssueKind};
use crate::windows::Window;

/// Calendar year.
pub type Year = i32;

macro_rules! id_newtype {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn new(s: impl Into<String>) -> Self {
                $name(s.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl std::fmt::Display for $name {
            fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                $name(s.to_owned())
            }
        }
    };
}

id_newtype!(
    /// Opaque researcher key (disambiguation happens upstream).
    ResearcherId
);
id_newtype!(
    /// Scientific disciplinary sector key: the field a researcher belongs to.
    SdsId
);
id_newtype!(
    /// Disciplinary area key: the discipline grouping of sectors.
    UdaId
);
id_newtype!(
    /// Opaque publication key.
    PubId
);
id_newtype!(
    /// Opaque university / institution key.
    InstitutionId
);
id_newtype!(
    /// Subject-category key of a journal (used for citation baselines).
    CategoryId
);

/// One evaluated researcher. Every researcher belongs to exactly one SDS.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Researcher {
    pub researcher_id: ResearcherId,
    pub sds_id: SdsId,
    pub university_id: InstitutionId,
    pub active_from: Year,
    pub active_to: Year,
}

/// One indexed publication with its citation count at the observation date.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Publication {
    pub pub_id: PubId,
    pub year: Year,
    pub citation_count: u32,
    pub subject_categories: Vec<CategoryId>,
}

/// One byline slot of a publication. `researcher_id` is absent for co-authors
/// outside the evaluated roster, so byline length and positions stay correct
/// even when only part of the author list is under assessment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuthorshipEntry {
    pub pub_id: PubId,
    /// 1-based position in the byline.
    pub position: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub researcher_id: Option<ResearcherId>,
    pub institution_id: InstitutionId,
}

/// Per-sector taxonomy record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SdsInfo {
    pub uda_id: UdaId,
    /// When set, authorship weights for researchers of this sector use the
    /// position-based scheme instead of uniform `1/s`.
    pub positional_weighting: bool,
}

/// Mapping of every SDS to its disciplinary area plus the per-sector
/// weighting flag.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldTaxonomy {
    entries: BTreeMap<SdsId, SdsInfo>,
}

impl FieldTaxonomy {
    pub fn new(entries: BTreeMap<SdsId, SdsInfo>) -> Self {
        FieldTaxonomy { entries }
    }

    pub fn get(&self, sds: &SdsId) -> Option<&SdsInfo> {
        self.entries.get(sds)
    }

    pub fn uda_of(&self, sds: &SdsId) -> Option<&UdaId> {
        self.entries.get(sds).map(|e| &e.uda_id)
    }

    pub fn positional_weighting(&self, sds: &SdsId) -> bool {
        self.entries.get(sds).map(|e| e.positional_weighting).unwrap_or(false)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SdsId, &SdsInfo)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Lookup structures derived from the canonicalized rows at construction.
#[derive(Debug, Clone)]
pub struct CorpusIndex {
    researcher_pos: HashMap<ResearcherId, usize>,
    pub_pos: HashMap<PubId, usize>,
    /// Per publication (by index): range into the sorted authorship vector.
    byline_range: Vec<Range<usize>>,
    /// Per researcher (by index): authorship-entry indices, ascending.
    entries_of_researcher: Vec<Vec<usize>>,
    /// Per SDS: researcher indices, ascending.
    researchers_of_sds: BTreeMap<SdsId, Vec<usize>>,
}

/// Immutable container of all input data for one assessment run.
#[derive(Debug, Clone)]
pub struct Corpus {
    researchers: Vec<Researcher>,
    publications: Vec<Publication>,
    authorship: Vec<AuthorshipEntry>,
    taxonomy: FieldTaxonomy,
    observation_date_label: String,
    index: CorpusIndex,
}

impl PartialEq for Corpus {
    fn eq(&self, other: &Self) -> bool {
        // index is derived data
        self.researchers == other.researchers
            && self.publications == other.publications
            && self.authorship == other.authorship
            && self.taxonomy == other.taxonomy
            && self.observation_date_label == other.observation_date_label
    }
}

impl Corpus {
    /// Build a corpus from raw rows. Rows are sorted into canonical order
    /// (researchers and publications by id, authorship by publication and
    /// position) and every invariant is checked. All findings are returned
    /// together rather than failing on the first.
    pub fn new(
        mut researchers: Vec<Researcher>,
        mut publications: Vec<Publication>,
        mut authorship: Vec<AuthorshipEntry>,
        taxonomy: FieldTaxonomy,
        observation_date_label: impl Into<String>,
    ) -> Result<Corpus, DataError> {
        researchers.sort_by(|a, b| a.researcher_id.cmp(&b.researcher_id));
        publications.sort_by(|a, b| a.pub_id.cmp(&b.pub_id));
        authorship.sort_by(|a, b| a.pub_id.cmp(&b.pub_id).then(a.position.cmp(&b.position)));

        let mut issues = Vec::new();
        validate_researchers(&researchers, &taxonomy, &mut issues);
        validate_publications(&publications, &mut issues);

        let researcher_pos: HashMap<ResearcherId, usize> = researchers
            .iter()
            .enumerate()
            .map(|(i, r)| (r.researcher_id.clone(), i))
            .collect();
        let pub_pos: HashMap<PubId, usize> = publications
            .iter()
            .enumerate()
            .map(|(i, p)| (p.pub_id.clone(), i))
            .collect();

        validate_authorship(&authorship, &publications, &pub_pos, &researcher_pos, &mut issues);

        if !issues.is_empty() {
            return Err(DataError::Validation(issues));
        }

        let mut byline_range = vec![0..0; publications.len()];
        let mut start = 0;
        while start < authorship.len() {
            let pub_id = &authorship[start].pub_id;
            let mut end = start + 1;
            while end < authorship.len() && &authorship[end].pub_id == pub_id {
                end += 1;
            }
            byline_range[pub_pos[pub_id]] = start..end;
            start = end;
        }

        let mut entries_of_researcher = vec![Vec::new(); researchers.len()];
        for (i, entry) in authorship.iter().enumerate() {
            if let Some(rid) = &entry.researcher_id {
                entries_of_researcher[researcher_pos[rid]].push(i);
            }
        }

        let mut researchers_of_sds: BTreeMap<SdsId, Vec<usize>> = BTreeMap::new();
        for (i, r) in researchers.iter().enumerate() {
            researchers_of_sds.entry(r.sds_id.clone()).or_default().push(i);
        }

        Ok(Corpus {
            researchers,
            publications,
            authorship,
            taxonomy,
            observation_date_label: observation_date_label.into(),
            index: CorpusIndex {
                researcher_pos,
                pub_pos,
                byline_range,
                entries_of_researcher,
                researchers_of_sds,
            },
        })
    }

    pub fn researchers(&self) -> &[Researcher] {
        &self.researchers
    }

    pub fn publications(&self) -> &[Publication] {
        &self.publications
    }

    pub fn authorship(&self) -> &[AuthorshipEntry] {
        &self.authorship
    }

    pub fn taxonomy(&self) -> &FieldTaxonomy {
        &self.taxonomy
    }

    pub fn observation_date_label(&self) -> &str {
        &self.observation_date_label
    }

    pub fn researcher(&self, id: &ResearcherId) -> Option<&Researcher> {
        self.index.researcher_pos.get(id).map(|&i| &self.researchers[i])
    }

    pub fn publication(&self, id: &PubId) -> Option<&Publication> {
        self.index.pub_pos.get(id).map(|&i| &self.publications[i])
    }

    /// The full byline of a publication, ordered by position.
    pub fn byline(&self, id: &PubId) -> &[AuthorshipEntry] {
        match self.index.pub_pos.get(id) {
            Some(&i) => &self.authorship[self.index.byline_range[i].clone()],
            None => &[],
        }
    }

    /// All (publication, own byline entry) pairs of a researcher, in
    /// canonical publication order.
    pub fn works_of(&self, id: &ResearcherId) -> impl Iterator<Item = (&Publication, &AuthorshipEntry)> {
        let entries: &[usize] = match self.index.researcher_pos.get(id) {
            Some(&i) => &self.index.entries_of_researcher[i],
            None => &[],
        };
        entries.iter().map(move |&e| {
            let entry = &self.authorship[e];
            let pub_idx = self.index.pub_pos[&entry.pub_id];
            (&self.publications[pub_idx], entry)
        })
    }

    /// Researchers of one SDS, in canonical id order.
    pub fn researchers_in_sds(&self, sds: &SdsId) -> impl Iterator<Item = &Researcher> {
        let idxs: &[usize] = self
            .index
            .researchers_of_sds
            .get(sds)
            .map(|v| v.as_slice())
            .unwrap_or(&[]);
        idxs.iter().map(move |&i| &self.researchers[i])
    }

    /// SDS keys that actually have researchers, in order.
    pub fn sds_with_staff(&self) -> impl Iterator<Item = &SdsId> {
        self.index.researchers_of_sds.keys()
    }

    /// True when the researcher has at least one publication with a year in
    /// `window`.
    pub fn has_publication_in(&self, id: &ResearcherId, window: Window) -> bool {
        self.works_of(id).any(|(p, _)| window.contains(p.year))
    }
}

/// Researchers in a continuous role covering the whole window: active no
/// later than the window start and no earlier than its end, both inclusive.
pub fn stable_staff(corpus: &Corpus, window: Window) -> BTreeSet<ResearcherId> {
    corpus
        .researchers()
        .iter()
        .filter(|r| r.active_from <= window.start() && r.active_to >= window.end())
        .map(|r| r.researcher_id.clone())
        .collect()
}

/// Sectors retained for assessment: at least `min_members` stable staff, and
/// at least `min_active_share` of them with one or more publications inside
/// the window. Both thresholds are inclusive.
pub fn filter_eligible_sds(
    corpus: &Corpus,
    window: Window,
    min_active_share: f64,
    min_members: usize,
) -> BTreeSet<SdsId> {
    let stable = stable_staff(corpus, window);
    let mut eligible = BTreeSet::new();
    for sds in corpus.sds_with_staff() {
        let members: Vec<&Researcher> = corpus
            .researchers_in_sds(sds)
            .filter(|r| stable.contains(&r.researcher_id))
            .collect();
        if members.len() < min_members {
            continue;
        }
        let active = members
            .iter()
            .filter(|r| corpus.has_publication_in(&r.researcher_id, window))
            .count();
        if active as f64 >= min_active_share * members.len() as f64 {
            eligible.insert(sds.clone());
        }
    }
    eligible
}

fn validate_researchers(researchers: &[Researcher], taxonomy: &FieldTaxonomy, issues: &mut Vec<Issue>) {
    let mut seen: HashSet<&ResearcherId> = HashSet::new();
    for r in researchers {
        if !seen.insert(&r.researcher_id) {
            issues.push(
                Issue::new(
                    IssueKind::DuplicateKey,
                    "researchers",
                    format!("researcher_id \"{}\" appears more than once", r.researcher_id),
                )
                .in_column("researcher_id")
                .with_key(r.researcher_id.as_str()),
            );
        }
        if taxonomy.get(&r.sds_id).is_none() {
            issues.push(
                Issue::new(
                    IssueKind::DanglingReference,
                    "researchers",
                    format!(
                        "researcher \"{}\" references sds_id \"{}\" missing from the taxonomy",
                        r.researcher_id, r.sds_id
                    ),
                )
                .in_column("sds_id")
                .with_key(r.sds_id.as_str()),
            );
        }
        if r.active_from > r.active_to {
            issues.push(
                Issue::new(
                    IssueKind::Invariant,
                    "researchers",
                    format!(
                        "researcher \"{}\" has active_from {} after active_to {}",
                        r.researcher_id, r.active_from, r.active_to
                    ),
                )
                .in_column("active_from")
                .with_key(r.researcher_id.as_str()),
            );
        }
    }
}

fn validate_publications(publications: &[Publication], issues: &mut Vec<Issue>) {
    let mut seen: HashSet<&PubId> = HashSet::new();
    for p in publications {
        if !seen.insert(&p.pub_id) {
            issues.push(
                Issue::new(
                    IssueKind::DuplicateKey,
                    "publications",
                    format!("pub_id \"{}\" appears more than once", p.pub_id),
                )
                .in_column("pub_id")
                .with_key(p.pub_id.as_str()),
            );
        }
        if p.subject_categories.is_empty() {
            issues.push(
                Issue::new(
                    IssueKind::Schema,
                    "publications",
                    format!("publication \"{}\" has no subject categories", p.pub_id),
                )
                .in_column("subject_categories")
                .with_key(p.pub_id.as_str()),
            );
        }
        let mut cats: HashSet<&CategoryId> = HashSet::new();
        for c in &p.subject_categories {
            if !cats.insert(c) {
                issues.push(
                    Issue::new(
                        IssueKind::DuplicateKey,
                        "publications",
                        format!("publication \"{}\" lists category \"{}\" twice", p.pub_id, c),
                    )
                    .in_column("subject_categories")
                    .with_key(c.as_str()),
                );
            }
        }
    }
}

fn validate_authorship(
    authorship: &[AuthorshipEntry],
    publications: &[Publication],
    pub_pos: &HashMap<PubId, usize>,
    researcher_pos: &HashMap<ResearcherId, usize>,
    issues: &mut Vec<Issue>,
) {
    for entry in authorship {
        if !pub_pos.contains_key(&entry.pub_id) {
            issues.push(
                Issue::new(
                    IssueKind::DanglingReference,
                    "authorship",
                    format!("authorship row references unknown pub_id \"{}\"", entry.pub_id),
                )
                .in_column("pub_id")
                .with_key(entry.pub_id.as_str()),
            );
        }
        if let Some(rid) = &entry.researcher_id {
            if !researcher_pos.contains_key(rid) {
                issues.push(
                    Issue::new(
                        IssueKind::DanglingReference,
                        "authorship",
                        format!("authorship row references unknown researcher_id \"{rid}\""),
                    )
                    .in_column("researcher_id")
                    .with_key(rid.as_str()),
                );
            }
        }
    }

    // Byline shape: positions must form 1..=s, each researcher at most once.
    let mut by_pub: BTreeMap<&PubId, Vec<&AuthorshipEntry>> = BTreeMap::new();
    for entry in authorship {
        if pub_pos.contains_key(&entry.pub_id) {
            by_pub.entry(&entry.pub_id).or_default().push(entry);
        }
    }
    for (pub_id, entries) in &by_pub {
        let positions: Vec<u32> = entries.iter().map(|e| e.position).collect();
        let expected: Vec<u32> = (1..=positions.len() as u32).collect();
        if positions != expected {
            issues.push(
                Issue::new(
                    IssueKind::BylineGap,
                    "authorship",
                    format!(
                        "byline of \"{pub_id}\" has positions {positions:?}, expected contiguous 1..={}",
                        positions.len()
                    ),
                )
                .in_column("position")
                .with_key(pub_id.as_str()),
            );
        }
        let mut seen: HashSet<&ResearcherId> = HashSet::new();
        for e in entries {
            if let Some(rid) = &e.researcher_id {
                if !seen.insert(rid) {
                    issues.push(
                        Issue::new(
                            IssueKind::DuplicateKey,
                            "authorship",
                            format!("researcher \"{rid}\" appears twice in the byline of \"{pub_id}\""),
                        )
                        .in_column("researcher_id")
                        .with_key(rid.as_str()),
                    );
                }
            }
        }
    }
    for p in publications {
        if !by_pub.contains_key(&p.pub_id) {
            issues.push(
                Issue::new(
                    IssueKind::Invariant,
                    "authorship",
                    format!("publication \"{}\" has no authorship entries", p.pub_id),
                )
                .with_key(p.pub_id.as_str()),
            );
        }
    }
}
