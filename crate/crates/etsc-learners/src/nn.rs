/// Index of the pool item nearest to `query` under `distance`; ties resolve
/// to the lowest index. `None` for an empty pool.
pub fn nn1<T, F>(query: &T, pool: &[T], distance: F) -> Option<usize>
where
    F: Fn(&T, &T) -> f64,
{
    let mut best: Option<(usize, f64)> = None;
    for (i, item) in pool.iter().enumerate() {
        let d = distance(query, item);
        match best {
            Some((_, bd)) if d >= bd => {}
            _ => best = Some((i, d)),
        }
    }
    best.map(|(i, _)| i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn euclid(a: &Vec<f64>, b: &Vec<f64>) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    }

    #[test]
    fn query_in_pool_finds_itself() {
        let pool = vec![vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]];
        assert_eq!(nn1(&pool[1].clone(), &pool, euclid), Some(1));
    }

    #[test]
    fn ties_resolve_to_lowest_index() {
        let pool = vec![vec![1.0], vec![-1.0], vec![1.0]];
        assert_eq!(nn1(&vec![0.0], &pool, euclid), Some(0));
    }

    #[test]
    fn empty_pool_has_no_neighbor() {
        let pool: Vec<Vec<f64>> = vec![];
        assert_eq!(nn1(&vec![0.0], &pool, euclid), None);
    }

    proptest! {
        #[test]
        fn result_is_no_farther_than_any_pool_member(
            pool_vals in proptest::collection::vec(-100.0..100.0f64, 1..40),
            q in -100.0..100.0f64,
        ) {
            let pool: Vec<Vec<f64>> = pool_vals.iter().map(|&v| vec![v]).collect();
            let query = vec![q];
            let idx = nn1(&query, &pool, euclid).unwrap();
            let d = euclid(&query, &pool[idx]);
            for other in &pool {
                prop_assert!(d <= euclid(&query, other) + 1e-12);
            }
        }
    }
}
