for (let i = 0; i < 1e7; i++) {
  let [x, , y] = [i, i, i];
}
