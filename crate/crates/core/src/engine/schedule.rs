use super::design::SubsetDesign;

/// Group subsets into batches of pairwise-disjoint index sets.
///
/// First-fit greedy colouring of the overlap graph in sweep order, so each
/// batch keeps the relative order of its members.
pub fn schedule_parallel(design: &SubsetDesign) -> Vec<Vec<usize>> {
    let len = design.subsets.iter().flatten().max().map_or(0, |&m| m + 1);
    let mut batches: Vec<Vec<usize>> = Vec::new();
    let mut occupied: Vec<Vec<bool>> = Vec::new();
    for (j, subset) in design.subsets.iter().enumerate() {
        let slot = occupied
            .iter()
            .position(|used| subset.iter().all(|&i| !used[i]));
        let slot = slot.unwrap_or_else(|| {
            batches.push(Vec::new());
            occupied.push(vec![false; len]);
            batches.len() - 1
        });
        for &i in subset {
            occupied[slot][i] = true;
        }
        batches[slot].push(j);
    }
    batches
}
