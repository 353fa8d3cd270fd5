// Payload shapes of the review API.
export {};
