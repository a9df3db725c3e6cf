//! Pedigree data model, validation and peeling order.
//!
//! A [`Pedigree`] is a validated set of individuals with parent links. The
//! likelihood engine works on the marriage-node graph: a bipartite graph
//! with one node per individual and one node per nuclear family (a parent
//! pair together with their children). When that graph is a forest the
//! pedigree can be peeled one nuclear family at a time, each step
//! collapsing onto a single "pivot" individual that separates the peeled
//! part from the rest.

use std::collections::{BTreeMap, HashMap, VecDeque};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PedigreeError {
    #[error("pedigree is empty")]
    EmptyPedigree,
    #[error("duplicate individual id {0:?}")]
    DuplicateId(String),
    #[error("individual {individual:?} references missing parent {parent:?}")]
    MissingParent { individual: String, parent: String },
    #[error("individual {0:?} has exactly one parent specified")]
    HalfSpecifiedParents(String),
    #[error("individual {0:?} is its own ancestor")]
    CycleDetected(String),
    #[error("marriage-node graph contains a loop through {0:?}")]
    LoopDetected(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Sex {
    Male,
    Female,
    #[default]
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Individual {
    pub id: String,
    pub father: Option<String>,
    pub mother: Option<String>,
    pub sex: Sex,
}

impl Individual {
    pub fn founder(id: impl Into<String>) -> Self {
        Individual { id: id.into(), father: None, mother: None, sex: Sex::Unknown }
    }

    pub fn child(id: impl Into<String>, father: impl Into<String>, mother: impl Into<String>) -> Self {
        Individual {
            id: id.into(),
            father: Some(father.into()),
            mother: Some(mother.into()),
            sex: Sex::Unknown,
        }
    }

    pub fn with_sex(mut self, sex: Sex) -> Self {
        self.sex = sex;
        self
    }

    pub fn is_founder(&self) -> bool {
        self.father.is_none()
    }
}

/// A validated pedigree. Individuals keep their input order; parent links
/// are resolved to indices into that order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pedigree {
    family_id: String,
    individuals: Vec<Individual>,
    parents: Vec<Option<(usize, usize)>>,
    topo: Vec<usize>,
}

/// Validates raw individual records into a [`Pedigree`].
pub fn validate_pedigree(
    family_id: impl Into<String>,
    raw: Vec<Individual>,
) -> Result<Pedigree, PedigreeError> {
    if raw.is_empty() {
        return Err(PedigreeError::EmptyPedigree);
    }
    let mut index = HashMap::with_capacity(raw.len());
    for (i, ind) in raw.iter().enumerate() {
        if index.insert(ind.id.as_str(), i).is_some() {
            return Err(PedigreeError::DuplicateId(ind.id.clone()));
        }
    }

    let mut parents = Vec::with_capacity(raw.len());
    for ind in &raw {
        let link = match (&ind.father, &ind.mother) {
            (None, None) => None,
            (Some(f), Some(m)) => {
                if f == &ind.id || m == &ind.id {
                    return Err(PedigreeError::CycleDetected(ind.id.clone()));
                }
                let lookup = |p: &String| {
                    index.get(p.as_str()).copied().ok_or_else(|| PedigreeError::MissingParent {
                        individual: ind.id.clone(),
                        parent: p.clone(),
                    })
                };
                Some((lookup(f)?, lookup(m)?))
            }
            _ => return Err(PedigreeError::HalfSpecifiedParents(ind.id.clone())),
        };
        parents.push(link);
    }

    // Kahn's algorithm; leftovers sit on (or below) an ancestry cycle.
    let n = raw.len();
    let mut pending = vec![0usize; n];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, link) in parents.iter().enumerate() {
        if let Some((f, m)) = *link {
            pending[i] = if f == m { 1 } else { 2 };
            children[f].push(i);
            if m != f {
                children[m].push(i);
            }
        }
    }
    let mut queue: VecDeque<usize> = (0..n).filter(|&i| pending[i] == 0).collect();
    let mut topo = Vec::with_capacity(n);
    while let Some(i) = queue.pop_front() {
        topo.push(i);
        for &c in &children[i] {
            pending[c] -= 1;
            if pending[c] == 0 {
                queue.push_back(c);
            }
        }
    }
    if topo.len() != n {
        let stuck = (0..n).find(|&i| pending[i] > 0).expect("unsorted individual");
        return Err(PedigreeError::CycleDetected(raw[stuck].id.clone()));
    }

    Ok(Pedigree { family_id: family_id.into(), individuals: raw, parents, topo })
}

impl Pedigree {
    pub fn family_id(&self) -> &str {
        &self.family_id
    }

    pub fn individuals(&self) -> &[Individual] {
        &self.individuals
    }

    pub fn len(&self) -> usize {
        self.individuals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.individuals.is_empty()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.individuals.iter().position(|ind| ind.id == id)
    }

    pub fn id(&self, index: usize) -> &str {
        &self.individuals[index].id
    }

    /// Parent indices `(father, mother)` of a non-founder.
    pub fn parents(&self, index: usize) -> Option<(usize, usize)> {
        self.parents[index]
    }

    pub fn is_founder(&self, index: usize) -> bool {
        self.parents[index].is_none()
    }

    pub fn founders(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.is_founder(i)).collect()
    }

    pub fn non_founders(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| !self.is_founder(i)).collect()
    }

    /// Individual indices ordered so that parents precede their children.
    pub fn topological_order(&self) -> &[usize] {
        &self.topo
    }

    /// Nuclear families keyed by parent pair, in order of first appearance
    /// of a child.
    pub fn nuclear_families(&self) -> Vec<NuclearFamily> {
        let mut by_pair: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut families: Vec<NuclearFamily> = Vec::new();
        for (i, link) in self.parents.iter().enumerate() {
            if let Some((f, m)) = *link {
                let slot = *by_pair.entry((f, m)).or_insert_with(|| {
                    families.push(NuclearFamily { father: f, mother: m, children: Vec::new() });
                    families.len() - 1
                });
                families[slot].children.push(i);
            }
        }
        families
    }

    /// Adjacency of the individual graph in which parents are linked to
    /// their children and to each other.
    pub fn relative_graph(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.len()];
        let mut link = |a: usize, b: usize| {
            if !adj[a].contains(&b) {
                adj[a].push(b);
                adj[b].push(a);
            }
        };
        for fam in self.nuclear_families() {
            link(fam.father, fam.mother);
            for &c in &fam.children {
                link(fam.father, c);
                link(fam.mother, c);
            }
        }
        adj
    }
}

/// A parent pair and all of their children in the pedigree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NuclearFamily {
    pub father: usize,
    pub mother: usize,
    pub children: Vec<usize>,
}

impl NuclearFamily {
    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        [self.father, self.mother].into_iter().chain(self.children.iter().copied())
    }

    pub fn contains(&self, individual: usize) -> bool {
        self.members().any(|m| m == individual)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeelStep {
    pub family: NuclearFamily,
    /// The member that still connects to unpeeled families; `None` for the
    /// last family of a connected component.
    pub pivot: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeelingOrder {
    pub steps: Vec<PeelStep>,
    /// Individuals belonging to no nuclear family (unrelated founders).
    pub singletons: Vec<usize>,
}

/// Computes a peeling order over nuclear families.
///
/// At each step the peelable families are those with at most one member
/// still shared with another unpeeled family. Among them, families with a
/// pivot go first, ordered by the pivot's id, then by family position.
pub fn peeling_order(p: &Pedigree) -> Result<PeelingOrder, PedigreeError> {
    let families = p.nuclear_families();
    let n = p.len();

    // Forest check on the marriage-node graph via union-find.
    let mut parent: Vec<usize> = (0..n + families.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (k, fam) in families.iter().enumerate() {
        let node = n + k;
        for m in fam.members() {
            let (a, b) = (find(&mut parent, node), find(&mut parent, m));
            if a == b {
                return Err(PedigreeError::LoopDetected(p.id(m).to_string()));
            }
            parent[a] = b;
        }
    }

    let mut degree = vec![0usize; n];
    for fam in &families {
        for m in fam.members() {
            degree[m] += 1;
        }
    }
    let singletons: Vec<usize> = (0..n).filter(|&i| degree[i] == 0).collect();

    let mut remaining: Vec<bool> = vec![true; families.len()];
    let mut steps = Vec::with_capacity(families.len());
    for _ in 0..families.len() {
        let mut best: Option<(bool, &str, usize, Option<usize>)> = None;
        for (k, fam) in families.iter().enumerate() {
            if !remaining[k] {
                continue;
            }
            let shared: Vec<usize> = fam.members().filter(|&m| degree[m] > 1).collect();
            if shared.len() > 1 {
                continue;
            }
            let pivot = shared.first().copied();
            let key = (pivot.is_none(), pivot.map_or("", |v| p.id(v)), k, pivot);
            let better = match &best {
                None => true,
                Some(b) => (key.0, key.1, key.2) < (b.0, b.1, b.2),
            };
            if better {
                best = Some(key);
            }
        }
        // A forest always has a peelable family.
        let (_, _, k, pivot) = best.expect("loop-free marriage graph has a leaf family");
        remaining[k] = false;
        for m in families[k].members() {
            degree[m] -= 1;
        }
        steps.push(PeelStep { family: families[k].clone(), pivot });
    }

    Ok(PeelingOrder { steps, singletons })
}
