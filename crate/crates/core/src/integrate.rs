//! Fixed-step classical Runge-Kutta.

/// State types that can be advanced by [`rk4`]. The derivative has the
/// same representation as the state.
pub trait OdeState: Clone {
    /// `self + h * d`
    fn add_scaled(&self, h: f64, d: &Self) -> Self;
}

/// One classical fourth-order step of `ds/dt = f(t, s)`.
pub fn rk4<S: OdeState>(t: f64, dt: f64, s: &S, mut f: impl FnMut(f64, &S) -> S) -> S {
    let half = 0.5 * dt;
    let k1 = f(t, s);
    let k2 = f(t + half, &s.add_scaled(half, &k1));
    let k3 = f(t + half, &s.add_scaled(half, &k2));
    let k4 = f(t + dt, &s.add_scaled(dt, &k3));
    s.add_scaled(dt / 6.0, &k1)
        .add_scaled(dt / 3.0, &k2)
        .add_scaled(dt / 3.0, &k3)
        .add_scaled(dt / 6.0, &k4)
}

impl<R, C, S> OdeState for nalgebra::Matrix<f64, R, C, S>
where
    R: nalgebra::Dim,
    C: nalgebra::Dim,
    S: nalgebra::RawStorage<f64, R, C> + Clone,
    nalgebra::Matrix<f64, R, C, S>: std::ops::Add<
            nalgebra::Matrix<f64, R, C, S>,
            Output = nalgebra::Matrix<f64, R, C, S>,
        > + std::ops::Mul<f64, Output = nalgebra::Matrix<f64, R, C, S>>,
{
    fn add_scaled(&self, h: f64, d: &Self) -> Self {
        self.clone() + d.clone() * h
    }
}
