static int adxl_set_odr(struct adxl_state *st, unsigned int odr)
{
	int ret;
	unsigned int reg;

	mutex_lock(&st->lock);
	ret = regmap_read(st->regmap, ADXL_REG_CTRL, &reg);
	if (ret)
		return ret;

	reg &= ~ADXL_ODR_MASK;
	reg |= odr;
	ret = regmap_write(st->regmap, ADXL_REG_CTRL, reg);
	mutex_unlock(&st->lock);

	return ret;
}
