use rand::seq::index::sample;
use rand::Rng;

/// One environment transition.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: usize,
    pub reward: f64,
    pub next_state: Vec<f64>,
    pub done: bool,
}

/// Fixed-capacity ring of transitions; the oldest entry is overwritten
/// once full.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    items: Vec<Transition>,
    next: usize,
    inserted: u64,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self {
            capacity,
            items: Vec::with_capacity(capacity.min(1 << 16)),
            next: 0,
            inserted: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Total pushes since creation.
    pub fn inserted(&self) -> u64 {
        self.inserted
    }

    pub fn push(&mut self, t: Transition) {
        if self.items.len() < self.capacity {
            self.items.push(t);
        } else {
            self.items[self.next] = t;
        }
        self.next = (self.next + 1) % self.capacity;
        self.inserted += 1;
    }

    /// Up to `batch` distinct transitions drawn uniformly.
    pub fn sample<R: Rng>(&self, batch: usize, rng: &mut R) -> Vec<&Transition> {
        let n = batch.min(self.items.len());
        sample(rng, self.items.len(), n)
            .into_iter()
            .map(|i| &self.items[i])
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::seeded_rng;

    fn t(i: usize) -> Transition {
        Transition {
            state: vec![i as f64],
            action: i,
            reward: 0.0,
            next_state: vec![],
            done: false,
        }
    }

    #[test]
    fn keeps_only_recent_transitions() {
        let mut buf = ReplayBuffer::new(5);
        let mut rng = seeded_rng(0);
        for i in 0..23 {
            buf.push(t(i));
            assert!(buf.len() <= 5);
            for s in buf.sample(5, &mut rng) {
                assert!(s.action + 5 > i, "stale transition {} at {}", s.action, i);
            }
        }
        assert_eq!(buf.inserted(), 23);
    }

    #[test]
    fn batch_has_no_duplicates() {
        let mut buf = ReplayBuffer::new(100);
        for i in 0..100 {
            buf.push(t(i));
        }
        let mut rng = seeded_rng(3);
        let mut seen: Vec<usize> = buf.sample(64, &mut rng).iter().map(|s| s.action).collect();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), 64);
        assert_eq!(buf.sample(500, &mut rng).len(), 100);
    }
}
