use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

/// Identity of a node: the sorted training-sample indices it selects.
///
/// Ordering and equality look at the digest first and fall back to the full
/// index list, so digest collisions never merge distinct subsets.
#[derive(Debug, Clone)]
pub struct NodeKey {
    digest: u64,
    samples: Vec<u32>,
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn digest(samples: &[u32]) -> u64 {
    let mut h = FNV_OFFSET;
    for s in samples {
        for b in s.to_le_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(FNV_PRIME);
        }
    }
    h
}

impl NodeKey {
    /// `samples` must be strictly increasing.
    pub fn new(samples: Vec<u32>) -> Self {
        debug_assert!(samples.windows(2).all(|w| w[0] < w[1]), "unsorted node key");
        Self { digest: digest(&samples), samples }
    }

    pub fn from_unsorted(mut samples: Vec<u32>) -> Self {
        samples.sort_unstable();
        samples.dedup();
        Self::new(samples)
    }

    pub fn samples(&self) -> &[u32] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn digest(&self) -> u64 {
        self.digest
    }

    pub fn contains(&self, sample: u32) -> bool {
        self.samples.binary_search(&sample).is_ok()
    }
}

impl PartialEq for NodeKey {
    fn eq(&self, other: &Self) -> bool {
        self.digest == other.digest && self.samples == other.samples
    }
}

impl Eq for NodeKey {}

impl Ord for NodeKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.digest.cmp(&other.digest).then_with(|| self.samples.cmp(&other.samples))
    }
}

impl PartialOrd for NodeKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Renders as the canonical subset string, e.g. `0,2,4`.
impl fmt::Display for NodeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.samples.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    #[test]
    fn equal_subsets_share_a_key() {
        let a = NodeKey::new(vec![0, 2, 4]);
        let b = NodeKey::from_unsorted(vec![4, 0, 2, 2]);
        assert_eq!(a, b);
        assert_eq!(a.to_string(), "0,2,4");
        assert_ne!(a, NodeKey::new(vec![0, 2]));
    }

    #[test]
    fn colliding_digests_still_compare_by_content() {
        let mut a = NodeKey::new(vec![1]);
        let b = NodeKey::new(vec![2]);
        a.digest = b.digest;
        assert_ne!(a, b);
        assert_eq!(a.cmp(&b), Ordering::Less);
    }
}
