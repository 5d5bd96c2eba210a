/// Consistency tracker for checkpoint-accepted predictions: fires once the
/// same label has been produced and accepted at `v` consecutive
/// checkpoints.
///
/// With `reject_resets` (the default used by TEASER) a rejected checkpoint
/// clears the run; otherwise rejected checkpoints are skipped without
/// touching it. A label change always restarts the run.
#[derive(Debug, Clone)]
pub struct ConsistencyGate {
    v: usize,
    reject_resets: bool,
    last: Option<usize>,
    run: usize,
}

impl ConsistencyGate {
    /// `v` must be at least 1.
    pub fn new(v: usize, reject_resets: bool) -> ConsistencyGate {
        assert!(v >= 1, "consistency requirement must be at least 1");
        ConsistencyGate {
            v,
            reject_resets,
            last: None,
            run: 0,
        }
    }

    /// Records one checkpoint outcome; true means the gate is satisfied at
    /// this checkpoint.
    pub fn observe(&mut self, label: usize, accepted: bool) -> bool {
        if !accepted {
            if self.reject_resets {
                self.last = None;
                self.run = 0;
            }
            return false;
        }
        if self.last == Some(label) {
            self.run += 1;
        } else {
            self.last = Some(label);
            self.run = 1;
        }
        self.run >= self.v
    }

    /// Current run length (consecutive accepted checkpoints with one label).
    pub fn run(&self) -> usize {
        self.run
    }

    pub fn reset(&mut self) {
        self.last = None;
        self.run = 0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn v1_fires_on_first_accepted_label() {
        let mut gate = ConsistencyGate::new(1, true);
        assert!(gate.observe(3, true));
    }

    #[test]
    fn v2_needs_two_consecutive_accepted_same_labels() {
        let mut gate = ConsistencyGate::new(2, true);
        assert!(!gate.observe(0, true));
        assert!(gate.observe(0, true));

        let mut gate = ConsistencyGate::new(2, true);
        assert!(!gate.observe(0, true));
        assert!(!gate.observe(1, true), "label change restarts the run");
        assert!(gate.observe(1, true));
    }

    #[test]
    fn rejection_resets_in_strict_mode_only() {
        let mut strict = ConsistencyGate::new(2, true);
        assert!(!strict.observe(0, true));
        assert!(!strict.observe(0, false));
        assert!(!strict.observe(0, true), "run restarted after rejection");

        let mut relaxed = ConsistencyGate::new(2, false);
        assert!(!relaxed.observe(0, true));
        assert!(!relaxed.observe(0, false));
        assert!(relaxed.observe(0, true), "rejection skipped, run kept");
    }

    proptest! {
        #[test]
        fn fires_exactly_when_a_v_run_of_accepted_labels_ends(
            events in proptest::collection::vec((0usize..3, any::<bool>()), 1..40),
            v in 1usize..5,
        ) {
            // Brute-force reference: scan the full history at every step.
            let mut gate = ConsistencyGate::new(v, true);
            for (i, &(label, accepted)) in events.iter().enumerate() {
                let fired = gate.observe(label, accepted);
                let mut run = 0;
                for &(l, a) in events[..=i].iter().rev() {
                    if a && l == label {
                        run += 1;
                    } else {
                        break;
                    }
                }
                let expected = accepted && run >= v;
                prop_assert_eq!(fired, expected, "step {} of {:?}", i, events);
            }
        }
    }
}
