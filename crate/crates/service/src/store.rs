use std::collections::HashMap;
use std::time::{Duration, Instant};

use fractaug_core::io::BitDepth;
use fractaug_core::{ImageF, MaskF};
use parking_lot::Mutex;
use uuid::Uuid;

#[derive(Debug, Clone)]
pub struct StoredImage {
    pub image: ImageF,
    pub depth: BitDepth,
    pub mask: Option<MaskF>,
}

/// In-memory uploads, evicted once older than the TTL. Expired entries are
/// swept lazily on every access.
pub struct ImageStore {
    ttl: Duration,
    entries: Mutex<HashMap<Uuid, (Instant, StoredImage)>>,
}

impl ImageStore {
    pub fn new(ttl: Duration) -> Self {
        ImageStore {
            ttl,
            entries: Mutex::new(HashMap::new()),
        }
    }

    fn sweep(&self, map: &mut HashMap<Uuid, (Instant, StoredImage)>) {
        let now = Instant::now();
        map.retain(|_, (at, _)| now.duration_since(*at) < self.ttl);
    }

    pub fn insert(&self, img: StoredImage) -> Uuid {
        let id = Uuid::new_v4();
        let mut map = self.entries.lock();
        self.sweep(&mut map);
        map.insert(id, (Instant::now(), img));
        id
    }

    pub fn get(&self, id: &Uuid) -> Option<StoredImage> {
        let mut map = self.entries.lock();
        self.sweep(&mut map);
        map.get(id).map(|(_, s)| s.clone())
    }

    /// Attaches a mask; false when the id is unknown.
    pub fn set_mask(&self, id: &Uuid, mask: MaskF) -> bool {
        let mut map = self.entries.lock();
        self.sweep(&mut map);
        match map.get_mut(id) {
            Some((_, s)) => {
                s.mask = Some(mask);
                true
            }
            None => false,
        }
    }

    pub fn len(&self) -> usize {
        let mut map = self.entries.lock();
        self.sweep(&mut map);
        map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry() -> StoredImage {
        StoredImage {
            image: ImageF::filled(2, 2, 1, 0.5).unwrap(),
            depth: BitDepth::Eight,
            mask: None,
        }
    }

    #[test]
    fn expiry() {
        let s = ImageStore::new(Duration::from_millis(30));
        let id = s.insert(entry());
        assert!(s.get(&id).is_some());
        std::thread::sleep(Duration::from_millis(60));
        assert!(s.get(&id).is_none());
        assert!(s.is_empty());
    }

    #[test]
    fn ids_are_fresh() {
        let s = ImageStore::new(Duration::from_secs(60));
        assert_ne!(s.insert(entry()), s.insert(entry()));
        assert_eq!(s.len(), 2);
    }
}
