/** Shapes exchanged with the review service's JSON API. */
export {};
