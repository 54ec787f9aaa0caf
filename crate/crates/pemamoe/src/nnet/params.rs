//! Flat, named parameter storage.
//!
//! All network parameters live in one contiguous `f64` buffer. Entries carry
//! a name, a shape and a group tag; gradients and optimizer moments are plain
//! buffers of the same length, so snapshot/restore and elementwise updates
//! are trivial and bitwise-exact.

use std::collections::HashMap;

use crate::error::NnetError;

/// Group tag used for per-group learning rates, freezing, resets and noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParamGroup {
    /// Actor router, including the gate-noise net when present.
    Router,
    /// One actor expert (or the MLP trunk, tagged `Expert(0)`).
    Expert(usize),
    /// Shared actor head.
    Head,
    /// Action log-std vector.
    LogStd,
    /// Everything on the critic side.
    Critic,
}

#[derive(Debug, Clone)]
pub struct ParamEntry {
    pub name: String,
    pub shape: Vec<usize>,
    pub group: ParamGroup,
    pub offset: usize,
    pub len: usize,
}

/// Named flat parameter store.
#[derive(Debug, Clone, Default)]
pub struct ParamStore {
    entries: Vec<ParamEntry>,
    index: HashMap<String, usize>,
    data: Vec<f64>,
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Register a parameter tensor with initial values.
    pub fn register(
        &mut self,
        name: &str,
        shape: &[usize],
        group: ParamGroup,
        values: Vec<f64>,
    ) -> Result<(), NnetError> {
        if self.index.contains_key(name) {
            return Err(NnetError::DuplicateParam(name.to_string()));
        }
        let len: usize = shape.iter().product();
        if values.len() != len {
            return Err(NnetError::ShapeMismatch {
                name: name.to_string(),
                expected: len,
                got: values.len(),
            });
        }
        let offset = self.data.len();
        self.data.extend_from_slice(&values);
        self.index.insert(name.to_string(), self.entries.len());
        self.entries.push(ParamEntry {
            name: name.to_string(),
            shape: shape.to_vec(),
            group,
            offset,
            len,
        });
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn entries(&self) -> &[ParamEntry] {
        &self.entries
    }

    pub fn entry(&self, name: &str) -> Result<&ParamEntry, NnetError> {
        self.index
            .get(name)
            .map(|i| &self.entries[*i])
            .ok_or_else(|| NnetError::UnknownParam(name.to_string()))
    }

    pub fn has(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn get(&self, name: &str) -> &[f64] {
        let e = self.entry(name).expect("parameter name");
        &self.data[e.offset..e.offset + e.len]
    }

    pub fn get_mut(&mut self, name: &str) -> &mut [f64] {
        let e = self.entry(name).expect("parameter name").clone();
        &mut self.data[e.offset..e.offset + e.len]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Deep copy of all values, restorable bitwise.
    pub fn snapshot(&self) -> Vec<f64> {
        self.data.clone()
    }

    pub fn restore(&mut self, snapshot: &[f64]) {
        assert_eq!(snapshot.len(), self.data.len(), "snapshot layout mismatch");
        self.data.copy_from_slice(snapshot);
    }

    /// data += a * x, elementwise over the full store.
    pub fn axpy(&mut self, a: f64, x: &[f64]) {
        assert_eq!(x.len(), self.data.len(), "axpy layout mismatch");
        for (d, xi) in self.data.iter_mut().zip(x) {
            *d += a * xi;
        }
    }

    /// Fresh zeroed buffer matching this store's layout (for gradients).
    pub fn zeros_like(&self) -> Vec<f64> {
        vec![0.0; self.data.len()]
    }

    /// Total parameter count whose name starts with `prefix`.
    pub fn count_with_prefix(&self, prefix: &str) -> usize {
        self.entries
            .iter()
            .filter(|e| e.name.starts_with(prefix))
            .map(|e| e.len)
            .sum()
    }

    /// Total parameter count in `group`.
    pub fn count_in_group(&self, group: ParamGroup) -> usize {
        self.entries.iter().filter(|e| e.group == group).map(|e| e.len).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn store_with(names: &[(&str, usize, ParamGroup)]) -> ParamStore {
        let mut s = ParamStore::new();
        for (i, (name, len, group)) in names.iter().enumerate() {
            let vals: Vec<f64> = (0..*len).map(|k| (i * 100 + k) as f64 * 0.123).collect();
            s.register(name, &[*len], *group, vals).unwrap();
        }
        s
    }

    #[test]
    fn register_rejects_duplicates_and_bad_shapes() {
        let mut s = ParamStore::new();
        s.register("a.w", &[2, 3], ParamGroup::Router, vec![0.0; 6]).unwrap();
        assert!(matches!(
            s.register("a.w", &[1], ParamGroup::Router, vec![0.0]),
            Err(NnetError::DuplicateParam(_))
        ));
        assert!(matches!(
            s.register("a.b", &[4], ParamGroup::Router, vec![0.0; 3]),
            Err(NnetError::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn snapshot_restore_round_trips_bitwise() {
        let mut s = store_with(&[
            ("actor.router.w", 6, ParamGroup::Router),
            ("actor.expert0.w1", 12, ParamGroup::Expert(0)),
            ("actor.logstd", 2, ParamGroup::LogStd),
        ]);
        let snap = s.snapshot();
        for v in s.data_mut() {
            *v = v.mul_add(1.7, 0.31);
        }
        assert_ne!(s.data(), snap.as_slice());
        s.restore(&snap);
        assert_eq!(s.data(), snap.as_slice());
    }

    #[test]
    fn groups_partition_all_parameters() {
        let s = store_with(&[
            ("actor.router.w", 6, ParamGroup::Router),
            ("actor.expert0.w1", 12, ParamGroup::Expert(0)),
            ("actor.expert1.w1", 12, ParamGroup::Expert(1)),
            ("actor.head.w", 4, ParamGroup::Head),
            ("actor.logstd", 2, ParamGroup::LogStd),
            ("critic.head.w", 3, ParamGroup::Critic),
        ]);
        let by_groups = s.count_in_group(ParamGroup::Router)
            + s.count_in_group(ParamGroup::Expert(0))
            + s.count_in_group(ParamGroup::Expert(1))
            + s.count_in_group(ParamGroup::Head)
            + s.count_in_group(ParamGroup::LogStd)
            + s.count_in_group(ParamGroup::Critic);
        assert_eq!(by_groups, s.len());
    }

    #[test]
    fn axpy_is_elementwise() {
        let mut s = store_with(&[("x", 3, ParamGroup::Head)]);
        let before = s.snapshot();
        s.axpy(2.0, &[1.0, 10.0, 100.0]);
        let after = s.data();
        assert_eq!(after[0], before[0] + 2.0);
        assert_eq!(after[1], before[1] + 20.0);
        assert_eq!(after[2], before[2] + 200.0);
    }
}
