use crate::scalar::Scalar;

/// `sin(z)·tanh(z)`.
#[inline]
pub fn sintanh<T: Scalar>(z: T) -> T {
    z.sin() * z.tanh()
}

/// First derivative of [`sintanh`].
#[inline]
pub fn sintanh_prime<T: Scalar>(z: T) -> T {
    let th = z.tanh();
    z.cos() * th + z.sin() * (T::one() - th * th)
}

/// Value, first and second derivative in one evaluation.
#[inline]
pub fn sintanh_jet<T: Scalar>(z: T) -> (T, T, T) {
    let (s, c) = z.sin_cos();
    let th = z.tanh();
    let sech2 = T::one() - th * th;
    let two = T::lit(2.0);
    (
        s * th,
        c * th + s * sech2,
        -s * th + two * c * sech2 - two * s * th * sech2,
    )
}
