//! Embedded document store behind a narrow interface. Collections are named
//! maps of id → JSON document with upsert semantics. A production document
//! database would slot in behind [`DocumentStore`] unchanged.

use std::collections::BTreeMap;
use std::sync::RwLock;

use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpsertOutcome {
    Inserted,
    Replaced,
}

pub trait DocumentStore: Send + Sync {
    fn upsert(&self, collection: &str, id: &str, doc: Value) -> UpsertOutcome;
    fn get(&self, collection: &str, id: &str) -> Option<Value>;
    fn delete(&self, collection: &str, id: &str) -> bool;
    /// Visits every document of a collection in id order.
    fn for_each(&self, collection: &str, f: &mut dyn FnMut(&str, &Value));
    fn collection_names(&self) -> Vec<String>;
    fn count(&self, collection: &str) -> usize;
    /// Serializes the whole store as `{collection: {id: doc}}`.
    fn dump_json(&self) -> Value;
}

/// In-memory store with serialized writes; reads see committed state.
#[derive(Debug, Default)]
pub struct MemoryStore {
    inner: RwLock<BTreeMap<String, BTreeMap<String, Value>>>,
}

impl MemoryStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn load_json(dump: &Value) -> Option<Self> {
        let mut inner = BTreeMap::new();
        for (collection, docs) in dump.as_object()? {
            let mut map = BTreeMap::new();
            for (id, doc) in docs.as_object()? {
                map.insert(id.clone(), doc.clone());
            }
            inner.insert(collection.clone(), map);
        }
        Some(Self {
            inner: RwLock::new(inner),
        })
    }

    pub fn total_documents(&self) -> usize {
        self.inner
            .read()
            .expect("store lock")
            .values()
            .map(|c| c.len())
            .sum()
    }
}

impl DocumentStore for MemoryStore {
    fn upsert(&self, collection: &str, id: &str, doc: Value) -> UpsertOutcome {
        let mut inner = self.inner.write().expect("store lock");
        let existed = inner
            .entry(collection.to_string())
            .or_default()
            .insert(id.to_string(), doc)
            .is_some();
        if existed {
            UpsertOutcome::Replaced
        } else {
            UpsertOutcome::Inserted
        }
    }

    fn get(&self, collection: &str, id: &str) -> Option<Value> {
        self.inner
            .read()
            .expect("store lock")
            .get(collection)?
            .get(id)
            .cloned()
    }

    fn delete(&self, collection: &str, id: &str) -> bool {
        self.inner
            .write()
            .expect("store lock")
            .get_mut(collection)
            .is_some_and(|c| c.remove(id).is_some())
    }

    fn for_each(&self, collection: &str, f: &mut dyn FnMut(&str, &Value)) {
        if let Some(docs) = self.inner.read().expect("store lock").get(collection) {
            for (id, doc) in docs {
                f(id, doc);
            }
        }
    }

    fn collection_names(&self) -> Vec<String> {
        self.inner.read().expect("store lock").keys().cloned().collect()
    }

    fn count(&self, collection: &str) -> usize {
        self.inner
            .read()
            .expect("store lock")
            .get(collection)
            .map_or(0, |c| c.len())
    }

    fn dump_json(&self) -> Value {
        let inner = self.inner.read().expect("store lock");
        let mut out = serde_json::Map::new();
        for (collection, docs) in inner.iter() {
            let mut m = serde_json::Map::new();
            for (id, doc) in docs {
                m.insert(id.clone(), doc.clone());
            }
            out.insert(collection.clone(), Value::Object(m));
        }
        Value::Object(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn upsert_by_id_replaces_not_duplicates() {
        let store = MemoryStore::new();
        assert_eq!(store.upsert("gps", "a", json!({"v": 1})), UpsertOutcome::Inserted);
        assert_eq!(store.upsert("gps", "a", json!({"v": 2})), UpsertOutcome::Replaced);
        assert_eq!(store.count("gps"), 1);
        assert_eq!(store.get("gps", "a").unwrap()["v"], 2);
    }

    #[test]
    fn dump_and_load_round_trip() {
        let store = MemoryStore::new();
        store.upsert("gps", "a", json!({"v": 1}));
        store.upsert("event", "b", json!({"k": "x"}));
        let dump = store.dump_json();
        let loaded = MemoryStore::load_json(&dump).unwrap();
        assert_eq!(loaded.dump_json(), dump);
        assert_eq!(loaded.total_documents(), 2);
    }

    #[test]
    fn for_each_visits_in_id_order() {
        let store = MemoryStore::new();
        for id in ["c", "a", "b"] {
            store.upsert("x", id, json!(id));
        }
        let mut seen = Vec::new();
        store.for_each("x", &mut |id, _| seen.push(id.to_string()));
        assert_eq!(seen, ["a", "b", "c"]);
    }
}
