mod common;

use common::*;
use hwgail::baseline::PredictionLoss;
use hwgail::gail::{ActorLoss, BellmanLoss, DiscriminatorLoss, Transition};
use hwgail::nn::Head;
use hwgail::trajectory::{Action, Point, State};
use rand::Rng;

const T: usize = 12;
const WIDTHS: (usize, usize) = (6, 4);

fn states(seed: u64, n: usize) -> Vec<State> {
    let mut r = rng(seed);
    (0..n).map(|_| random_open_state(&mut r, T)).collect()
}

fn assert_agrees(check: GradCheck, what: &str) {
    assert!(
        check.fraction() >= 0.95,
        "{what}: {}/{} coordinates agree, worst relative error {}",
        check.agreeing,
        check.checked,
        check.worst
    );
}

#[test]
fn discriminator_cross_entropy() {
    let disc = random_params(Head::Discriminator, T, WIDTHS, 1);
    let (real, fake) = (states(2, 4), states(3, 4));
    let loss = DiscriminatorLoss { real: &real, fake: &fake };
    assert_agrees(grad_check(&loss, &disc, 150, 1e-5, 1e-4, 4), "cross-entropy");
}

#[test]
fn bellman_residual() {
    let critic = random_params(Head::Critic, T, WIDTHS, 5);
    let target = random_params(Head::Critic, T, WIDTHS, 6);
    let disc = random_params(Head::Discriminator, T, WIDTHS, 7);
    let mut r = rng(8);
    let transitions: Vec<Transition> = states(9, 5)
        .into_iter()
        .map(|s| Transition::new(s, Action::new(r.random(), r.random())).unwrap())
        .collect();
    let loss = BellmanLoss::new(&disc, &target, &transitions, 0.9).unwrap();
    assert_agrees(grad_check(&loss, &critic, 150, 1e-5, 1e-4, 10), "Bellman");
}

#[test]
fn actor_objective_through_the_transition() {
    let actor = random_params(Head::Actor, T, WIDTHS, 11);
    let critic = random_params(Head::Critic, T, WIDTHS, 12);
    let disc = random_params(Head::Discriminator, T, WIDTHS, 13);
    let s = states(14, 5);
    for gamma in [0.0, 0.9] {
        let loss = ActorLoss { critic: &critic, disc: &disc, states: &s, gamma };
        assert_agrees(grad_check(&loss, &actor, 150, 1e-5, 1e-4, 15), "actor");
    }
}

#[test]
fn prediction_squared_error() {
    let params = random_params(Head::Actor, T, WIDTHS, 16);
    let mut r = rng(17);
    let pairs: Vec<(State, Point)> = states(18, 6)
        .into_iter()
        .map(|s| (s, random_point(&mut r)))
        .collect();
    let loss = PredictionLoss { pairs: &pairs };
    assert_agrees(grad_check(&loss, &params, 150, 1e-5, 1e-4, 19), "prediction");
}
