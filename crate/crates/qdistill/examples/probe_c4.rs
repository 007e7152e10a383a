use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use qdistill::densmat::ComplexMatrix;
use qdistill::locc::filtered_m_fraction;
use qdistill::states::{embed, max_entangled_projector};
use qdistill::Complex64;

fn main() {
    let embedded = embed(&max_entangled_projector(2), 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut gaussian = |rng: &mut ChaCha8Rng| {
        use rand::Rng;
        let u1: f64 = rng.gen::<f64>().max(1e-300);
        let u2: f64 = rng.gen();
        let r = (-2.0 * u1.ln()).sqrt();
        let th = 2.0 * std::f64::consts::PI * u2;
        Complex64::new(r * th.cos(), r * th.sin())
    };
    let mut max_seen: f64 = 0.0;
    let mut over_659 = 0; let mut over_666 = 0;
    for i in 0..100_000 {
        let a = ComplexMatrix::from_fn(3, 3, |_, _| gaussian(&mut rng));
        let b = ComplexMatrix::from_fn(3, 3, |_, _| gaussian(&mut rng));
        if let Some(f) = filtered_m_fraction(&embedded, &a, &b, 3) {
            if f > max_seen { max_seen = f; }
            if f > 0.659 { over_659 += 1; }
            if f > 2.0/3.0 - 1e-3 { over_666 += 1; }
        }
        if i == 9_999 { println!("after 1e4: max = {max_seen:.6}, >0.659: {over_659}, >2/3-1e-3: {over_666}"); }
    }
    println!("after 1e5: max = {max_seen:.6}, >0.659: {over_659}, >2/3-1e-3: {over_666}");
}
