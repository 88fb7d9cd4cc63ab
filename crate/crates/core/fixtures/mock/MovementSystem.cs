using UnityEngine;

// __CLASS__ provides dash and wall-slide abilities on top of basic movement.
__NOTES__
public class __CLASS__ : MonoBehaviour
{
    [SerializeField] private float dashSpeed = 18f;
    [SerializeField] private float dashDuration = 0.15f;
    [SerializeField] private float dashCooldown = 0.6f;
    [SerializeField] private float wallSlideSpeed = 2f;

    private Rigidbody2D body;
    private float dashTimer;
    private float cooldownTimer;
    private Vector2 dashDirection;

    public bool IsDashing => dashTimer > 0f;

    private void Awake()
    {
        body = GetComponent<Rigidbody2D>();
    }

    private void Update()
    {
        cooldownTimer -= Time.deltaTime;
        if (Input.GetKeyDown(KeyCode.LeftShift))
        {
            float direction = Mathf.Sign(Input.GetAxisRaw("Horizontal"));
            StartDash(new Vector2(direction, 0f));
        }
    }

    private void FixedUpdate()
    {
        if (!IsDashing)
        {
            return;
        }
        dashTimer -= Time.fixedDeltaTime;
        body.velocity = dashDirection * dashSpeed;
    }

    public bool StartDash(Vector2 direction)
    {
        if (cooldownTimer > 0f || direction == Vector2.zero)
        {
            return false;
        }
        dashDirection = direction.normalized;
        dashTimer = dashDuration;
        cooldownTimer = dashCooldown;
        return true;
    }

    public void ApplyWallSlide(bool touchingWall)
    {
        if (touchingWall && body.velocity.y < -wallSlideSpeed)
        {
            body.velocity = new Vector2(body.velocity.x, -wallSlideSpeed);
        }
    }
}
